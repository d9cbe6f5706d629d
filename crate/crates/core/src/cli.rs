//! Config-file driven runs of the `dwell` tool.
//!
//! A run parses one JSON config, computes every artifact in memory and only
//! then writes them, so a failing run leaves no files behind.

use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::Error;
use crate::lyapunov::{lambda_periodic, lambda_random_with, LyapEstimate, PeriodicSearch, RandomSearch};
use crate::matrix::{Mat, ModeSet};
use crate::pdmp::{
    chi_integral, chi_time_average, default_burn_in, invariant_histogram, scaling_check, simulate,
    PdmpConfig,
};
use crate::plot::{example31_marks, example31_plot, grid_arcs, svg_circle_plot, svg_histogram, ArcStyle};
use crate::projective::{bang_growth, Angle, ProjPoint};
use crate::reach::{example31_modes, example31_oracle, hausdorff, ics_compute, GridSet, ReachConfig};
use crate::signals::sample_random;

pub const MANIFEST: &str = "run_manifest.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Config,
    Numeric,
    Internal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Config,
            message: msg.into(),
        }
    }

    pub fn internal(msg: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Internal,
            message: msg.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Config => 2,
            ErrorKind::Numeric => 3,
            ErrorKind::Internal => 4,
        }
    }

    /// Single-line JSON for stderr.
    pub fn to_json_line(&self) -> String {
        json!({"error": self.kind, "exit_code": self.exit_code(), "message": self.message}).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let kind = match e {
            Error::NoConvergence | Error::NotInvariant(_) => ErrorKind::Numeric,
            _ => ErrorKind::Config,
        };
        CliError {
            kind,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Simulate,
    ControlSet,
    Lyapunov,
    Pdmp,
    ChiCompare,
    Example31,
}

impl Command {
    fn needs_seed(self) -> bool {
        !matches!(self, Command::ControlSet | Command::Example31)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub modes: Vec<Mat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub tau: f64,
}

impl SystemSpec {
    pub fn mode_set(&self) -> CliResult<ModeSet> {
        if self.modes.is_empty() {
            return Err(CliError::config("system.modes must list at least one matrix"));
        }
        let set = ModeSet::new(self.modes.clone())?;
        let set = match &self.labels {
            Some(l) => set.with_labels(l.clone())?,
            None => set,
        };
        Ok(set.validated()?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateParams {
    pub horizon: f64,
    /// Mean of the exponential part of each bang.
    pub max_extra: f64,
    /// Start vector; drawn at random when absent.
    pub x0: Option<Vec<f64>>,
    pub samples_per_bang: usize,
}

impl Default for SimulateParams {
    fn default() -> Self {
        SimulateParams {
            horizon: 20.0,
            max_extra: 1.0,
            x0: None,
            samples_per_bang: 16,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlSetParams {
    pub n: usize,
    pub n_durations: usize,
    pub t_max: Option<f64>,
    pub max_depth: Option<usize>,
}

impl Default for ControlSetParams {
    fn default() -> Self {
        ControlSetParams {
            n: 1024,
            n_durations: 32,
            t_max: None,
            max_depth: None,
        }
    }
}

impl ControlSetParams {
    fn reach_config(&self, tau: f64) -> ReachConfig {
        let mut cfg = ReachConfig::new(tau, self.n);
        cfg.n_durations = self.n_durations;
        if let Some(t) = self.t_max {
            cfg.t_max = t;
        }
        if let Some(d) = self.max_depth {
            cfg.max_depth = d;
        }
        cfg
    }

    fn resolve(&mut self, tau: f64) {
        let cfg = self.reach_config(tau);
        self.t_max = Some(cfg.t_max);
        self.max_depth = Some(cfg.max_depth);
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LyapMethod {
    Random,
    Periodic,
    #[default]
    Both,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LyapunovParams {
    pub method: LyapMethod,
    /// `seed` and `workers` come from the top level.
    pub random: RandomSearch,
    pub periodic: PeriodicSearch,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PdmpParams {
    pub lambda: f64,
    /// Transition matrix; uniform over the other modes when absent.
    pub q: Option<Vec<Vec<f64>>>,
    pub n_steps: usize,
    /// Defaults to 10% of the steps.
    pub burn_in: Option<usize>,
    pub n_bins: usize,
    /// Monte Carlo samples for the integral estimator (chi-compare only).
    pub n_mc: usize,
}

impl Default for PdmpParams {
    fn default() -> Self {
        PdmpParams {
            lambda: 1.0,
            q: None,
            n_steps: 100_000,
            burn_in: None,
            n_bins: 256,
            n_mc: 100_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Example31Params {
    pub a: f64,
    pub b: f64,
    pub n: usize,
    pub n_durations: usize,
}

impl Default for Example31Params {
    fn default() -> Self {
        Example31Params {
            a: 0.0,
            b: PI / 2.0,
            n: 1024,
            n_durations: 32,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Params {
    Simulate(SimulateParams),
    ControlSet(ControlSetParams),
    Lyapunov(LyapunovParams),
    Pdmp(PdmpParams),
    ChiCompare(PdmpParams),
    Example31(Example31Params),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: Command,
    system: SystemSpec,
    #[serde(default)]
    params: Value,
    output_dir: PathBuf,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default = "one")]
    workers: usize,
}

fn one() -> usize {
    1
}

/// A fully resolved run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub system: SystemSpec,
    pub params: Params,
    pub output_dir: PathBuf,
    pub seed: Option<u64>,
    pub workers: usize,
}

fn parse_params<T: for<'de> Deserialize<'de> + Default>(v: Value) -> CliResult<T> {
    if v.is_null() {
        return Ok(T::default());
    }
    serde_json::from_value(v).map_err(|e| CliError::config(format!("params: {e}")))
}

impl RunConfig {
    pub fn from_json(text: &str) -> CliResult<RunConfig> {
        let raw: RawConfig =
            serde_json::from_str(text).map_err(|e| CliError::config(format!("config: {e}")))?;
        if raw.command.needs_seed() && raw.seed.is_none() {
            return Err(CliError::config(format!(
                "command {:?} is randomized and needs an explicit seed",
                raw.command
            )));
        }
        if raw.workers == 0 {
            return Err(CliError::config("workers must be at least 1"));
        }
        if !(raw.system.tau.is_finite() && raw.system.tau >= 0.0) {
            return Err(CliError::config(format!("system.tau must be >= 0, got {}", raw.system.tau)));
        }
        let seed = raw.seed.unwrap_or(0);
        let params = match raw.command {
            Command::Simulate => Params::Simulate(parse_params(raw.params)?),
            Command::ControlSet => {
                let mut p: ControlSetParams = parse_params(raw.params)?;
                p.resolve(raw.system.tau);
                Params::ControlSet(p)
            }
            Command::Lyapunov => {
                for key in ["random", "periodic"] {
                    if let Some(obj) = raw.params.get(key).and_then(Value::as_object) {
                        if obj.contains_key("seed") || obj.contains_key("workers") {
                            return Err(CliError::config(format!(
                                "params.{key}: seed and workers are set at the top level"
                            )));
                        }
                    }
                }
                let mut p: LyapunovParams = parse_params(raw.params)?;
                p.random.seed = seed;
                p.random.workers = raw.workers;
                p.periodic.seed = seed;
                p.periodic.workers = raw.workers;
                Params::Lyapunov(p)
            }
            Command::Pdmp | Command::ChiCompare => {
                let mut p: PdmpParams = parse_params(raw.params)?;
                if p.burn_in.is_none() {
                    p.burn_in = Some(p.n_steps / 10);
                }
                if raw.command == Command::Pdmp {
                    Params::Pdmp(p)
                } else {
                    Params::ChiCompare(p)
                }
            }
            Command::Example31 => {
                if !raw.system.modes.is_empty() {
                    return Err(CliError::config("example31 builds its own modes; leave system.modes empty"));
                }
                Params::Example31(parse_params(raw.params)?)
            }
        };
        if raw.command != Command::Example31 {
            raw.system.mode_set()?;
        }
        Ok(RunConfig {
            command: raw.command,
            system: raw.system,
            params,
            output_dir: raw.output_dir,
            seed: raw.seed,
            workers: raw.workers,
        })
    }

    pub fn from_file(path: &Path) -> CliResult<RunConfig> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::from_json(&text)
    }

    /// The config recorded in a run manifest.
    pub fn from_manifest(text: &str) -> CliResult<RunConfig> {
        let v: Value =
            serde_json::from_str(text).map_err(|e| CliError::config(format!("manifest: {e}")))?;
        let cfg = v
            .get("config")
            .ok_or_else(|| CliError::config("manifest has no config"))?;
        RunConfig::from_json(&cfg.to_string())
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}

/// One output file.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    fn new(name: &str, contents: String) -> Self {
        Artifact {
            name: name.to_string(),
            contents,
        }
    }

    fn json(name: &str, value: &Value) -> Self {
        let mut text = serde_json::to_string_pretty(value).expect("serializable");
        text.push('\n');
        Artifact::new(name, text)
    }
}

/// Runs and writes all artifacts, returning the written paths.
pub fn run(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let mut artifacts = compute(cfg)?;
    artifacts.push(manifest(cfg, &artifacts));
    write_all(&cfg.output_dir, &artifacts)
}

fn manifest(cfg: &RunConfig, artifacts: &[Artifact]) -> Artifact {
    let outputs: Vec<&str> = artifacts.iter().map(|a| a.name.as_str()).collect();
    Artifact::json(
        MANIFEST,
        &json!({
            "tool": "dwell",
            "version": env!("CARGO_PKG_VERSION"),
            "config": cfg,
            "outputs": outputs,
        }),
    )
}

fn write_all(dir: &Path, artifacts: &[Artifact]) -> CliResult<Vec<PathBuf>> {
    let created_dir = !dir.exists();
    let mut written = Vec::new();
    let result = (|| -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        for a in artifacts {
            let path = dir.join(&a.name);
            fs::write(&path, &a.contents)?;
            written.push(path);
        }
        Ok(())
    })();
    match result {
        Ok(()) => Ok(written),
        Err(e) => {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            if created_dir {
                let _ = fs::remove_dir(dir);
            }
            Err(CliError::internal(format!("writing {}: {e}", dir.display())))
        }
    }
}

/// All artifacts except the manifest.
pub fn compute(cfg: &RunConfig) -> CliResult<Vec<Artifact>> {
    match &cfg.params {
        Params::Simulate(p) => run_simulate(cfg, p),
        Params::ControlSet(p) => run_control_set(cfg, p),
        Params::Lyapunov(p) => run_lyapunov(cfg, p),
        Params::Pdmp(p) => run_pdmp(cfg, p),
        Params::ChiCompare(p) => run_chi_compare(cfg, p),
        Params::Example31(p) => run_example31(cfg, p),
    }
}

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn point_header(d: usize) -> String {
    if d == 2 {
        "theta".to_string()
    } else {
        (0..d).map(|i| format!("q_{i}")).collect::<Vec<_>>().join(",")
    }
}

fn point_fields(p: &ProjPoint) -> String {
    match p.angle() {
        Some(a) => fmt_f(a.value()),
        None => p.as_slice().iter().map(|x| fmt_f(*x)).collect::<Vec<_>>().join(","),
    }
}

fn run_simulate(cfg: &RunConfig, p: &SimulateParams) -> CliResult<Vec<Artifact>> {
    let modes = cfg.system.mode_set()?;
    let tau = cfg.system.tau;
    if p.samples_per_bang == 0 {
        return Err(CliError::config("samples_per_bang must be positive"));
    }
    let signal = sample_random(tau, modes.len(), p.horizon, cfg.seed(), p.max_extra)?;
    let d = modes.dim();
    let x0 = match &p.x0 {
        Some(v) if v.len() != d => {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: v.len(),
            }
            .into())
        }
        Some(v) => ProjPoint::new(v.clone())?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed());
            rng.set_stream(1);
            let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            ProjPoint::new(v)?
        }
    };

    let mut sig_csv = String::from("index,mode,start,duration\n");
    let mut traj = format!("t,mode,{},log_growth\n", point_header(d));
    let mut t = 0.0;
    let mut growth = 0.0;
    let mut q = x0;
    traj.push_str(&format!(
        "{},{},{},{}\n",
        fmt_f(0.0),
        signal.bangs().first().map_or(0, |b| b.mode),
        point_fields(&q),
        fmt_f(0.0)
    ));
    for (i, bang) in signal.bangs().iter().enumerate() {
        sig_csv.push_str(&format!("{i},{},{},{}\n", bang.mode, fmt_f(t), fmt_f(bang.duration)));
        let a = modes.get(bang.mode)?;
        let h = bang.duration / p.samples_per_bang as f64;
        for k in 1..=p.samples_per_bang {
            let (g, v) = bang_growth(a, h, q.as_slice());
            growth += g;
            q = ProjPoint::new(v)?;
            let tk = if k == p.samples_per_bang { t + bang.duration } else { t + k as f64 * h };
            traj.push_str(&format!("{},{},{},{}\n", fmt_f(tk), bang.mode, point_fields(&q), fmt_f(growth)));
        }
        t += bang.duration;
    }
    let summary = json!({
        "n_bangs": signal.bangs().len(),
        "horizon": t,
        "log_growth": growth,
        "growth_rate": growth / t,
        "valid": signal.is_valid(),
    });
    Ok(vec![
        Artifact::new("signal.csv", sig_csv),
        Artifact::new("trajectory.csv", traj),
        Artifact::json("simulate.json", &summary),
    ])
}

fn union_of(sets: &[GridSet], n: usize) -> CliResult<GridSet> {
    let mut u = GridSet::empty(n)?;
    for s in sets {
        u = u.union(s);
    }
    Ok(u)
}

fn arcs_json(set: &GridSet) -> Value {
    Value::Array(
        set.arcs()
            .iter()
            .map(|a| json!({"start": a.start, "len": a.len}))
            .collect(),
    )
}

fn run_control_set(cfg: &RunConfig, p: &ControlSetParams) -> CliResult<Vec<Artifact>> {
    let modes = cfg.system.mode_set()?;
    if modes.dim() != 2 {
        return Err(CliError::config("control-set needs 2x2 modes"));
    }
    let rc = p.reach_config(cfg.system.tau);
    let classes = ics_compute(&modes, &rc)?;
    let union = union_of(&classes, rc.n)?;
    let svg = svg_circle_plot(&grid_arcs(&union, ArcStyle::Member), &[]);
    let summary = json!({
        "n_classes": classes.len(),
        "classes": classes.iter().map(arcs_json).collect::<Vec<_>>(),
        "member_cells": union.count(),
        "components": union.components().len(),
    });
    Ok(vec![
        Artifact::new("control_set.csv", union.to_csv()),
        Artifact::new("control_set.svg", svg),
        Artifact::json("control_set.json", &summary),
    ])
}

fn convergence_rows(out: &mut String, name: &str, est: &LyapEstimate) {
    for c in &est.convergence {
        out.push_str(&format!("{name},{},{}\n", c.budget, fmt_f(c.value)));
    }
}

fn run_lyapunov(cfg: &RunConfig, p: &LyapunovParams) -> CliResult<Vec<Artifact>> {
    let modes = cfg.system.mode_set()?;
    let tau = cfg.system.tau;
    let random = match p.method {
        LyapMethod::Random | LyapMethod::Both => Some(lambda_random_with(&modes, tau, &p.random)?),
        LyapMethod::Periodic => None,
    };
    let periodic = match p.method {
        LyapMethod::Periodic | LyapMethod::Both => Some(lambda_periodic(&modes, tau, &p.periodic)?),
        LyapMethod::Random => None,
    };
    let mut conv = String::from("method,budget,value\n");
    if let Some(e) = &random {
        convergence_rows(&mut conv, "random", e);
    }
    if let Some(e) = &periodic {
        convergence_rows(&mut conv, "periodic", e);
    }
    let difference = match (&random, &periodic) {
        (Some(r), Some(q)) => Some((r.value - q.value).abs()),
        _ => None,
    };
    let summary = json!({
        "tau": tau,
        "lambda_random": random,
        "lambda_periodic": periodic,
        "difference": difference,
    });
    Ok(vec![
        Artifact::json("lyapunov.json", &summary),
        Artifact::new("lyapunov_convergence.csv", conv),
    ])
}

fn pdmp_config(cfg: &RunConfig, p: &PdmpParams) -> CliResult<PdmpConfig> {
    let modes = cfg.system.mode_set()?;
    let pc = match &p.q {
        Some(q) => PdmpConfig {
            modes,
            q: q.clone(),
            lambda: p.lambda,
            tau: cfg.system.tau,
            seed: cfg.seed(),
        }
        .validated()?,
        None => PdmpConfig::uniform(modes, p.lambda, cfg.system.tau, cfg.seed())?,
    };
    Ok(pc)
}

fn mode_labels(modes: &ModeSet) -> Vec<String> {
    match modes.labels() {
        Some(l) => l.to_vec(),
        None => (0..modes.len()).map(|i| format!("mode {i}")).collect(),
    }
}

fn run_pdmp(cfg: &RunConfig, p: &PdmpParams) -> CliResult<Vec<Artifact>> {
    let pc = pdmp_config(cfg, p)?;
    let trace = simulate(&pc, p.n_steps)?;
    let burn_in = p.burn_in.unwrap_or_else(|| default_burn_in(&trace));
    let hist = invariant_histogram(&trace, burn_in, p.n_bins)?;
    let sc = scaling_check(&pc, &trace)?;
    let summary = json!({
        "n_steps": trace.n_steps(),
        "horizon": trace.horizon,
        "jump_rate_empirical": trace.n_steps() as f64 / trace.horizon,
        "jump_rate": pc.jump_rate(),
        "chi_time_avg": sc.chi_time,
        "chi_per_jump": sc.chi_jump,
        "scaling_difference": sc.difference,
    });
    let mut out = vec![
        Artifact::new("trace.csv", trace.to_csv()),
        Artifact::new("histogram.csv", hist.to_csv()),
        Artifact::json("pdmp.json", &summary),
    ];
    if pc.dim() == 2 {
        out.push(Artifact::new(
            "measure.svg",
            svg_histogram(&hist.probabilities(), &mode_labels(&pc.modes)),
        ));
    }
    Ok(out)
}

fn run_chi_compare(cfg: &RunConfig, p: &PdmpParams) -> CliResult<Vec<Artifact>> {
    let pc = pdmp_config(cfg, p)?;
    let trace = simulate(&pc, p.n_steps)?;
    let burn_in = p.burn_in.unwrap_or_else(|| default_burn_in(&trace));
    let hist = invariant_histogram(&trace, burn_in, p.n_bins)?;
    let time = chi_time_average(&trace)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed());
    rng.set_stream(1);
    let integral = chi_integral(&pc, &hist, p.n_mc, &mut rng)?;
    let sigma = (time.stderr.powi(2) + integral.stderr.powi(2)).sqrt();
    let agree = (time.value - integral.value).abs() <= 3.0 * sigma;
    let summary = json!({
        "chi_time_avg": time.value,
        "chi_time_avg_stderr": time.stderr,
        "chi_integral": integral.value,
        "chi_integral_stderr": integral.stderr,
        "chi_integral_self_normalized": integral.self_normalized,
        "normalization": integral.normalization,
        "sigma": sigma,
        "agree": agree,
    });
    let mut out = vec![
        Artifact::json("chi_compare.json", &summary),
        Artifact::new("histogram.csv", hist.to_csv()),
    ];
    if pc.dim() == 2 {
        out.push(Artifact::new(
            "measure.svg",
            svg_histogram(&hist.probabilities(), &mode_labels(&pc.modes)),
        ));
    }
    Ok(out)
}

fn run_example31(cfg: &RunConfig, p: &Example31Params) -> CliResult<Vec<Artifact>> {
    let tau = cfg.system.tau;
    let (a, b) = (Angle::new(p.a), Angle::new(p.b));
    let oracle = example31_oracle(tau, a, b)?;
    let modes = example31_modes(a, b);
    let mut rc = ReachConfig::new(tau, p.n);
    rc.n_durations = p.n_durations;
    let classes = ics_compute(&modes, &rc)?;
    let union = union_of(&classes, p.n)?;
    let computed = union.arcs();
    let reference = oracle.arcs();
    let distance = hausdorff(&computed, &reference);

    let marks = example31_marks(&oracle);
    let svg = example31_plot(&oracle, &union);

    let mut endpoints = String::from("point,theta\n");
    for m in &marks {
        endpoints.push_str(&format!("{},{}\n", m.label, fmt_f(m.theta)));
    }
    let summary = json!({
        "oracle": oracle,
        "computed_arcs": arcs_json(&union),
        "n_classes": classes.len(),
        "components": union.components().len(),
        "hausdorff": distance,
        "tolerance": 2.0 * PI / p.n as f64,
    });
    Ok(vec![
        Artifact::new("control_set.svg", svg),
        Artifact::new("control_set.csv", union.to_csv()),
        Artifact::new("example31.csv", endpoints),
        Artifact::json("example31.json", &summary),
    ])
}

/// Header and numeric rows of an emitted CSV. Non-numeric fields (such as
/// endpoint labels) come back as NaN.
pub fn parse_csv(text: &str) -> CliResult<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| CliError::config("empty CSV"))?
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let row: Vec<f64> = l.split(',').map(|f| f.parse().unwrap_or(f64::NAN)).collect();
            if row.len() == header.len() {
                Ok(row)
            } else {
                Err(CliError::config(format!("CSV row has {} fields, expected {}", row.len(), header.len())))
            }
        })
        .collect::<CliResult<_>>()?;
    Ok((header, rows))
}
