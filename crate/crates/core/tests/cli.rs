use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;

use dwell_core::cli::{parse_csv, MANIFEST};
use dwell_core::plot::{svg_circle_plot, ArcStyle, Mark, PlotArc};

const REGRESSION: &str = r#"{"modes": [[[1, 0], [0, -1]], [[-0.5, 0.8660254037844386], [0.8660254037844386, 0.5]]], "labels": ["A1", "A2"], "tau": 1}"#;

fn dwell(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_dwell")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn example31_run_marks_a_prime() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(
        tmp.path(),
        &format!(
            r#"{{"command": "example31", "system": {{"tau": 1}}, "params": {{"a": 0, "b": {}, "n": 512}}, "output_dir": "{}"}}"#,
            PI / 2.0,
            out.display()
        ),
    );
    let res = dwell(&["run", &cfg]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let (_, rows) = parse_csv(&fs::read_to_string(out.join("example31.csv")).unwrap()).unwrap();
    // A, A', B', B
    assert_eq!(rows.len(), 4);
    assert!((rows[1][1] - PI / 4.0).abs() < 1e-12);
    assert!((rows[2][1] - PI / 4.0).abs() < 1e-12);
    let svg = fs::read_to_string(out.join("control_set.svg")).unwrap();
    // A' at θ = π/4 is drawn at the top of the circle
    assert!(svg.contains(r#"cx="300.000" cy="50.000""#));
    assert!(svg.contains(">A'<"));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("example31.json")).unwrap()).unwrap();
    assert!(summary["hausdorff"].as_f64().unwrap() <= summary["tolerance"].as_f64().unwrap());
    assert!(out.join(MANIFEST).exists());
}

#[test]
fn chi_compare_agrees_on_regression_system() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(
        tmp.path(),
        &format!(
            r#"{{"command": "chi-compare", "system": {REGRESSION}, "seed": 11, "params": {{"n_steps": 20000, "n_mc": 20000}}, "output_dir": "{}"}}"#,
            out.display()
        ),
    );
    let res = dwell(&["run", &cfg]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("chi_compare.json")).unwrap()).unwrap();
    for key in ["chi_time_avg", "chi_integral", "sigma"] {
        assert!(v[key].as_f64().unwrap().is_finite());
    }
    assert_eq!(v["agree"], true);
    assert!(out.join("measure.svg").exists());
}

#[test]
fn malformed_config_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    for body in [
        "{not json".to_string(),
        format!(r#"{{"command": "pdmp", "system": {REGRESSION}, "output_dir": "{}"}}"#, out.display()),
        format!(
            r#"{{"command": "pdmp", "system": {REGRESSION}, "seed": 1, "bogus": 1, "output_dir": "{}"}}"#,
            out.display()
        ),
        format!(
            r#"{{"command": "control-set", "system": {{"modes": [[[1, 2]]], "tau": 1}}, "output_dir": "{}"}}"#,
            out.display()
        ),
    ] {
        let cfg = write_config(tmp.path(), &body);
        let res = dwell(&["run", &cfg]);
        assert_eq!(res.status.code(), Some(2), "{body}");
        let err = String::from_utf8(res.stderr).unwrap();
        assert_eq!(err.trim_end().lines().count(), 1);
        let v: serde_json::Value = serde_json::from_str(err.trim()).unwrap();
        assert_eq!(v["error"], "config");
        assert!(!out.exists());
    }
}

#[test]
fn runtime_failure_leaves_no_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    // burn-in beyond the trace parses but fails during the run
    let cfg = write_config(
        tmp.path(),
        &format!(
            r#"{{"command": "pdmp", "system": {REGRESSION}, "seed": 1, "params": {{"n_steps": 100, "burn_in": 500}}, "output_dir": "{}"}}"#,
            out.display()
        ),
    );
    let res = dwell(&["run", &cfg]);
    assert_eq!(res.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn replay_reproduces_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let second = tmp.path().join("second");
    let cfg = write_config(
        tmp.path(),
        &format!(
            r#"{{"command": "pdmp", "system": {REGRESSION}, "seed": 77, "params": {{"n_steps": 5000, "n_bins": 64}}, "output_dir": "{}"}}"#,
            first.display()
        ),
    );
    assert!(dwell(&["run", &cfg]).status.success());
    let manifest = first.join(MANIFEST);
    let res = dwell(&["replay", manifest.to_str().unwrap(), "--output-dir", second.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    for name in ["trace.csv", "histogram.csv", "pdmp.json", "measure.svg"] {
        assert_eq!(fs::read(first.join(name)).unwrap(), fs::read(second.join(name)).unwrap(), "{name}");
    }
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(m["config"]["params"]["burn_in"], 500);
    assert_eq!(m["config"]["params"]["lambda"], 1.0);
}

#[test]
fn lyapunov_and_control_set_commands() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("lyap");
    let cfg = write_config(
        tmp.path(),
        &format!(
            r#"{{"command": "lyapunov", "system": {REGRESSION}, "seed": 3, "params": {{"random": {{"n_signals": 100, "horizon": 50}}, "periodic": {{"max_bangs": 2}}}}, "output_dir": "{}"}}"#,
            out.display()
        ),
    );
    let res = dwell(&["run", &cfg]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let (header, rows) = parse_csv(&fs::read_to_string(out.join("lyapunov_convergence.csv")).unwrap()).unwrap();
    assert_eq!(header, ["method", "budget", "value"]);
    assert!(!rows.is_empty());

    let out = tmp.path().join("cs");
    let cfg = write_config(
        tmp.path(),
        &format!(
            r#"{{"command": "control-set", "system": {REGRESSION}, "params": {{"n": 256}}, "output_dir": "{}"}}"#,
            out.display()
        ),
    );
    assert!(dwell(&["run", &cfg]).status.success());
    let set = dwell_core::reach::GridSet::from_csv(&fs::read_to_string(out.join("control_set.csv")).unwrap()).unwrap();
    assert!(!set.is_empty());
}

#[test]
fn simulate_command_writes_trajectory() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sim");
    let cfg = write_config(
        tmp.path(),
        &format!(
            r#"{{"command": "simulate", "system": {REGRESSION}, "seed": 3, "params": {{"horizon": 10}}, "output_dir": "{}"}}"#,
            out.display()
        ),
    );
    assert!(dwell(&["run", &cfg]).status.success());
    let (_, sig) = parse_csv(&fs::read_to_string(out.join("signal.csv")).unwrap()).unwrap();
    assert!(sig.iter().all(|r| r[3] >= 1.0));
    let total: f64 = sig.iter().map(|r| r[3]).sum();
    assert!((total - 10.0).abs() < 1e-9);
}

#[test]
fn golden_circle_plot() {
    let arcs = [
        PlotArc { theta_lo: 0.0, theta_hi: 0.6, style: ArcStyle::Member },
        PlotArc { theta_lo: 1.2, theta_hi: 1.8, style: ArcStyle::Member },
    ];
    let marks = [
        Mark::new(0.0, "A"),
        Mark::new(0.6, "A'"),
        Mark::new(1.2, "B'"),
        Mark::new(1.8, "B"),
    ];
    let svg = svg_circle_plot(&arcs, &marks);
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/two_arcs.svg");
    if !golden.exists() {
        fs::write(&golden, &svg).unwrap();
    }
    assert_eq!(svg, fs::read_to_string(&golden).unwrap());
}
