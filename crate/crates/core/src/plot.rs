//! Static SVG plots: arcs on RP^1 drawn as a circle, and angle histograms.
//!
//! RP^1 has circumference `π`, so an angle `θ` sits at polar angle `2θ` on
//! the drawn circle. Output is byte-stable for identical input.

use std::f64::consts::PI;
use std::fmt::Write;

use crate::reach::{Arc, Example31, GridSet};

pub const CANVAS: f64 = 600.0;
pub const RADIUS: f64 = 250.0;
const CENTRE: f64 = CANVAS / 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArcStyle {
    /// Computed member arcs.
    Member,
    /// Closed-form reference arcs, drawn thinner and dashed.
    Reference,
}

impl ArcStyle {
    fn attrs(self) -> &'static str {
        match self {
            ArcStyle::Member => r##"stroke="#1f77b4" stroke-width="14" fill="none" stroke-opacity="0.6""##,
            ArcStyle::Reference => {
                r##"stroke="#d62728" stroke-width="3" fill="none" stroke-dasharray="8 5""##
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlotArc {
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub style: ArcStyle,
}

impl PlotArc {
    pub fn from_arc(arc: &Arc, style: ArcStyle) -> Self {
        PlotArc {
            theta_lo: arc.start,
            theta_hi: arc.start + arc.len,
            style,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mark {
    pub theta: f64,
    pub label: String,
}

impl Mark {
    pub fn new(theta: f64, label: impl Into<String>) -> Self {
        Mark {
            theta,
            label: label.into(),
        }
    }
}

fn point(theta: f64, r: f64) -> (f64, f64) {
    let phi = 2.0 * theta;
    (CENTRE + r * phi.cos(), CENTRE - r * phi.sin())
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Arcs of a grid set, one per connected run.
pub fn grid_arcs(set: &GridSet, style: ArcStyle) -> Vec<PlotArc> {
    set.arcs().iter().map(|a| PlotArc::from_arc(a, style)).collect()
}

/// Circle diagram of RP^1 with stroked arcs and labelled marks.
pub fn svg_circle_plot(arcs: &[PlotArc], marks: &[Mark]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS:.0}" height="{CANVAS:.0}" viewBox="0 0 {CANVAS:.0} {CANVAS:.0}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r##"<circle cx="{CENTRE:.0}" cy="{CENTRE:.0}" r="{RADIUS:.0}" stroke="#888888" stroke-width="1.5" fill="none"/>"##
    );
    for arc in arcs {
        let len = arc.theta_hi - arc.theta_lo;
        if len <= 0.0 {
            continue;
        }
        if len >= PI - 1e-12 {
            // two half-circles make a closed ring
            let (x0, y0) = point(arc.theta_lo, RADIUS);
            let (x1, y1) = point(arc.theta_lo + PI / 2.0, RADIUS);
            let _ = writeln!(
                s,
                r#"<path d="M {x0:.3} {y0:.3} A {RADIUS:.0} {RADIUS:.0} 0 0 0 {x1:.3} {y1:.3} A {RADIUS:.0} {RADIUS:.0} 0 0 0 {x0:.3} {y0:.3} Z" {}/>"#,
                arc.style.attrs()
            );
            continue;
        }
        let (x0, y0) = point(arc.theta_lo, RADIUS);
        let (x1, y1) = point(arc.theta_hi, RADIUS);
        let large = u8::from(len > PI / 2.0);
        let _ = writeln!(
            s,
            r#"<path d="M {x0:.3} {y0:.3} A {RADIUS:.0} {RADIUS:.0} 0 {large} 0 {x1:.3} {y1:.3}" {}/>"#,
            arc.style.attrs()
        );
    }
    for m in marks {
        let (x, y) = point(m.theta, RADIUS);
        let (lx, ly) = point(m.theta, 1.1 * RADIUS);
        let _ = writeln!(s, r##"<circle cx="{x:.3}" cy="{y:.3}" r="4" fill="#000000"/>"##);
        let _ = writeln!(
            s,
            r#"<text x="{lx:.3}" y="{ly:.3}" font-family="sans-serif" font-size="16" text-anchor="middle" dominant-baseline="middle">{}</text>"#,
            escape(&m.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Computed set against the closed-form arcs, with `A, A', B', B` marked.
pub fn example31_plot(oracle: &Example31, computed: &GridSet) -> String {
    let mut arcs = grid_arcs(computed, ArcStyle::Member);
    arcs.extend(oracle.arcs().iter().map(|r| PlotArc::from_arc(r, ArcStyle::Reference)));
    svg_circle_plot(&arcs, &example31_marks(oracle))
}

pub fn example31_marks(oracle: &Example31) -> [Mark; 4] {
    [
        Mark::new(oracle.a, "A"),
        Mark::new(oracle.a_prime, "A'"),
        Mark::new(oracle.b_prime, "B'"),
        Mark::new(oracle.b, "B"),
    ]
}

/// Stacked bar charts of angle probabilities, one panel per mode.
/// `probs[bin][mode]` as produced by a measure histogram.
pub fn svg_histogram(probs: &[Vec<f64>], mode_labels: &[String]) -> String {
    let n_bins = probs.len();
    let n_modes = probs.first().map_or(0, Vec::len);
    let margin = 40.0;
    let width = CANVAS - 2.0 * margin;
    let panel = (CANVAS - 2.0 * margin) / n_modes.max(1) as f64;
    let peak = probs
        .iter()
        .flatten()
        .copied()
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let bar = width / n_bins.max(1) as f64;
    let colours = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS:.0}" height="{CANVAS:.0}" viewBox="0 0 {CANVAS:.0} {CANVAS:.0}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for m in 0..n_modes {
        let base = margin + (m + 1) as f64 * panel;
        let height = panel - 24.0;
        let label = mode_labels.get(m).map_or_else(|| format!("mode {m}"), |l| escape(l));
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="14">{label}</text>"#,
            margin,
            base - panel + 16.0
        );
        let _ = writeln!(
            s,
            r##"<line x1="{margin:.3}" y1="{base:.3}" x2="{:.3}" y2="{base:.3}" stroke="#444444"/>"##,
            margin + width
        );
        for (b, row) in probs.iter().enumerate() {
            let h = row[m] / peak * height;
            if h <= 0.0 {
                continue;
            }
            let _ = writeln!(
                s,
                r#"<rect x="{:.3}" y="{:.3}" width="{bar:.3}" height="{h:.3}" fill="{}"/>"#,
                margin + b as f64 * bar,
                base - h,
                colours[m % colours.len()]
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="{margin:.3}" y="{:.3}" font-family="sans-serif" font-size="12">0</text>"#,
        CANVAS - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="12" text-anchor="end">&#960;</text>"#,
        margin + width,
        CANVAS - 12.0
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_plot_is_circle_only() {
        let s = svg_circle_plot(&[], &[]);
        assert_eq!(s.matches("<circle").count(), 1);
        assert!(!s.contains("<path"));
        assert_eq!(s, svg_circle_plot(&[], &[]));
    }

    #[test]
    fn full_arc_is_closed_ring() {
        let full = GridSet::full(64).unwrap();
        let arcs = grid_arcs(&full, ArcStyle::Member);
        assert_eq!(arcs.len(), 1);
        let s = svg_circle_plot(&arcs, &[]);
        let path = s.lines().find(|l| l.starts_with("<path")).unwrap();
        assert_eq!(path.matches(" A ").count(), 2);
        assert!(path.contains(" Z\""));
    }

    #[test]
    fn marks_sit_on_the_doubled_angle() {
        let s = svg_circle_plot(&[], &[Mark::new(PI / 4.0, "A'")]);
        // 2θ = π/2: top of the circle
        assert!(s.contains(r#"cx="300.000" cy="50.000""#));
        assert!(s.contains(r#"x="300.000" y="25.000""#));
    }

    #[test]
    fn histogram_has_bar_per_positive_bin() {
        let probs = vec![vec![0.5, 0.0], vec![0.25, 0.25]];
        let s = svg_histogram(&probs, &["f1".into(), "f2".into()]);
        assert_eq!(s.matches("<rect x=").count(), 3);
        assert!(s.contains(">f2<"));
    }
}
