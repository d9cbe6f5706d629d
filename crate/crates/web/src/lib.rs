//! Browser bindings for three interactive views: the two-shear control
//! set, the invariant measure of the random switching process, and the
//! periodic Lyapunov estimate as a function of the dwell-time.

use dwell_core::lyapunov::{lambda_periodic_sweep, PeriodicSearch};
use dwell_core::pdmp::{invariant_histogram, simulate, PdmpConfig};
use dwell_core::plot::{example31_plot, svg_histogram};
use dwell_core::reach::{example31_modes, example31_oracle, ics_compute, GridSet, ReachConfig};
use dwell_core::{Angle, Mat, ModeSet};
use serde_json::json;
use wasm_bindgen::prelude::*;

const MAX_GRID: usize = 4096;
const MAX_STEPS: usize = 500_000;

fn to_js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

/// Computed control set and closed-form arcs for modes with equilibria
/// `a` and `b`, as SVG.
pub fn control_set_svg(a: f64, b: f64, tau: f64, n: usize) -> Result<String, String> {
    if !(16..=MAX_GRID).contains(&n) {
        return Err(format!("grid size must be in 16..={MAX_GRID}"));
    }
    let (a, b) = (Angle::new(a), Angle::new(b));
    let oracle = example31_oracle(tau, a, b).map_err(|e| e.to_string())?;
    let sets = ics_compute(&example31_modes(a, b), &ReachConfig::new(tau, n)).map_err(|e| e.to_string())?;
    let mut union = GridSet::empty(n).map_err(|e| e.to_string())?;
    for s in &sets {
        union = union.union(s);
    }
    Ok(example31_plot(&oracle, &union))
}

/// Two saddles, `diag(1, -1)` and its rotation by `angle`.
pub fn saddle_pair(angle: f64) -> ModeSet {
    let a1 = Mat::diag(&[1.0, -1.0]);
    let r = Mat::rotation(angle);
    let a2 = &(&r * &a1) * &r.transpose();
    ModeSet::new(vec![a1, a2])
        .and_then(|m| m.with_labels(vec!["A1".into(), "A2".into()]))
        .expect("two 2x2 modes")
}

/// Histogram of the switching process on the saddle pair, as SVG.
pub fn measure_svg(angle: f64, lambda: f64, tau: f64, n_steps: usize, seed: u64) -> Result<String, String> {
    if !(100..=MAX_STEPS).contains(&n_steps) {
        return Err(format!("steps must be in 100..={MAX_STEPS}"));
    }
    let cfg = PdmpConfig::uniform(saddle_pair(angle), lambda, tau, seed).map_err(|e| e.to_string())?;
    let trace = simulate(&cfg, n_steps).map_err(|e| e.to_string())?;
    let hist = invariant_histogram(&trace, n_steps / 10, 128).map_err(|e| e.to_string())?;
    Ok(svg_histogram(&hist.probabilities(), &["A1".into(), "A2".into()]))
}

/// `[{tau, lambda}]` of the periodic estimate on the saddle pair.
pub fn lambda_curve_json(angle: f64, taus: &[f64]) -> Result<String, String> {
    if taus.is_empty() || taus.len() > 16 {
        return Err("between 1 and 16 dwell-times".into());
    }
    let search = PeriodicSearch {
        max_bangs: 3,
        duration_samples: 8,
        ..PeriodicSearch::default()
    };
    let est = lambda_periodic_sweep(&saddle_pair(angle), taus, &search).map_err(|e| e.to_string())?;
    let points: Vec<_> = taus
        .iter()
        .zip(&est)
        .map(|(t, e)| json!({"tau": t, "lambda": e.value}))
        .collect();
    Ok(serde_json::Value::Array(points).to_string())
}

#[wasm_bindgen]
pub fn example31_svg(a: f64, b: f64, tau: f64, n: usize) -> Result<String, JsError> {
    to_js(control_set_svg(a, b, tau, n))
}

#[wasm_bindgen]
pub fn pdmp_measure_svg(angle: f64, lambda: f64, tau: f64, n_steps: usize, seed: u32) -> Result<String, JsError> {
    to_js(measure_svg(angle, lambda, tau, n_steps, seed.into()))
}

#[wasm_bindgen]
pub fn lambda_vs_tau(angle: f64, taus: &[f64]) -> Result<String, JsError> {
    to_js(lambda_curve_json(angle, taus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn control_set_marks_endpoints() {
        let svg = control_set_svg(0.0, PI / 2.0, 1.0, 256).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains(">A'<") && svg.contains(">B'<"));
        assert!(control_set_svg(0.0, PI / 2.0, 1.0, 8).is_err());
        assert!(control_set_svg(0.0, 0.0, 1.0, 256).is_err());
    }

    #[test]
    fn measure_is_deterministic() {
        let a = measure_svg(PI / 3.0, 1.0, 1.0, 2000, 4).unwrap();
        assert_eq!(a, measure_svg(PI / 3.0, 1.0, 1.0, 2000, 4).unwrap());
        assert!(a.contains(">A2<"));
        assert!(measure_svg(PI / 3.0, -1.0, 1.0, 2000, 4).is_err());
    }

    #[test]
    fn lambda_curve_is_non_increasing() {
        let text = lambda_curve_json(PI / 3.0, &[0.0, 0.5, 1.0]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let vals: Vec<f64> = v.as_array().unwrap().iter().map(|p| p["lambda"].as_f64().unwrap()).collect();
        assert_eq!(vals.len(), 3);
        assert!(vals.windows(2).all(|w| w[1] <= w[0] + 1e-6));
        assert!(lambda_curve_json(PI / 3.0, &[]).is_err());
    }
}
