//! The dwell-time random process on projective space: inter-jump times are
//! `tau + Exp(lambda)`, the label chain follows a fixed transition matrix,
//! and between jumps the point follows the projected flow of the current
//! mode.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::matrix::{expm_unchecked, Mat, ModeSet};
use crate::projective::{bang_growth, Angle, PlanarFlow, ProjPoint};
use crate::reach::{flow_thicken, GridSet};

const SIMPSON_TOL: f64 = 1e-8;
const SIMPSON_DEPTH: usize = 40;
/// Batches for batch-means standard errors.
pub const BATCHES: usize = 30;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdmpConfig {
    pub modes: ModeSet,
    /// Row-stochastic with zero diagonal and positive off-diagonal entries.
    pub q: Vec<Vec<f64>>,
    pub lambda: f64,
    pub tau: f64,
    pub seed: u64,
}

impl PdmpConfig {
    /// Uniform switching to every other mode.
    pub fn uniform(modes: ModeSet, lambda: f64, tau: f64, seed: u64) -> Result<Self> {
        let m = modes.len();
        if m < 2 {
            return Err(invalid("the switching process needs at least two modes"));
        }
        let off = 1.0 / (m - 1) as f64;
        let q = (0..m)
            .map(|i| (0..m).map(|j| if i == j { 0.0 } else { off }).collect())
            .collect();
        PdmpConfig {
            modes,
            q,
            lambda,
            tau,
            seed,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        let m = self.modes.len();
        if m < 2 {
            return Err(invalid("the switching process needs at least two modes"));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(invalid(format!("lambda must be > 0, got {}", self.lambda)));
        }
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return Err(invalid(format!("tau must be >= 0, got {}", self.tau)));
        }
        if self.q.len() != m || self.q.iter().any(|r| r.len() != m) {
            return Err(invalid(format!("transition matrix must be {m}x{m}")));
        }
        for (i, row) in self.q.iter().enumerate() {
            if row[i] != 0.0 {
                return Err(invalid(format!("transition matrix diagonal must be 0 (row {i})")));
            }
            if row.iter().enumerate().any(|(j, p)| j != i && !(*p > 0.0)) {
                return Err(invalid(format!("off-diagonal transitions must be > 0 (row {i})")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(invalid(format!("transition row {i} sums to {sum}")));
            }
        }
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.modes.dim()
    }

    /// Long-run jump rate `lambda / (tau lambda + 1)`.
    pub fn jump_rate(&self) -> f64 {
        self.lambda / (self.tau * self.lambda + 1.0)
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// `tau + Exp(lambda)` by inverse CDF.
pub fn sample_dwell<R: Rng + ?Sized>(lambda: f64, tau: f64, rng: &mut R) -> Result<f64> {
    if !(lambda.is_finite() && lambda > 0.0) || !(tau.is_finite() && tau >= 0.0) {
        return Err(invalid(format!(
            "dwell law needs lambda > 0 and tau >= 0, got {lambda}, {tau}"
        )));
    }
    let u: f64 = rng.gen();
    Ok(tau - (1.0 - u).ln() / lambda)
}

fn next_label<R: Rng + ?Sized>(row: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (j, p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return j;
        }
    }
    // rounding leftover: last positive entry
    row.iter().rposition(|p| *p > 0.0).unwrap_or(0)
}

fn random_point<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ProjPoint {
    if dim == 2 {
        return ProjPoint::from_angle(rng.gen_range(0.0..PI));
    }
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r2: f64 = v.iter().map(|x| x * x).sum();
        if r2 > 1e-6 && r2 <= 1.0 {
            return ProjPoint::new(v).expect("nonzero vector");
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdmpTrace {
    pub jump_times: Vec<f64>,
    pub labels: Vec<usize>,
    pub points: Vec<ProjPoint>,
    /// `log‖Φ(T_n) x_0‖` with `log_growth[0] = 0`.
    pub log_growth: Vec<f64>,
    pub horizon: f64,
}

impl PdmpTrace {
    pub fn n_steps(&self) -> usize {
        self.jump_times.len() - 1
    }

    /// Number of jumps in `(0, t]`.
    pub fn jumps_until(&self, t: f64) -> usize {
        self.jump_times.partition_point(|&s| s <= t) - 1
    }

    /// CSV with columns `n,T_n,L_n,theta_n,cum_log_growth`; points of
    /// higher-dimensional traces are written as `q_0..q_{d-1}` instead of
    /// an angle.
    pub fn to_csv(&self) -> String {
        let d = self.points.first().map_or(2, ProjPoint::dim);
        let mut out = if d == 2 {
            String::from("n,T_n,L_n,theta_n,cum_log_growth\n")
        } else {
            let cols: Vec<String> = (0..d).map(|i| format!("q_{i}")).collect();
            format!("n,T_n,L_n,{},cum_log_growth\n", cols.join(","))
        };
        for n in 0..self.jump_times.len() {
            let p = &self.points[n];
            let point = match p.angle() {
                Some(a) => format!("{:.16e}", a.value()),
                None => p
                    .as_slice()
                    .iter()
                    .map(|x| format!("{x:.16e}"))
                    .collect::<Vec<_>>()
                    .join(","),
            };
            out.push_str(&format!(
                "{n},{:.16e},{},{point},{:.16e}\n",
                self.jump_times[n], self.labels[n], self.log_growth[n]
            ));
        }
        out
    }
}

/// Runs `n_steps` jumps from a random start drawn with the config's seed.
pub fn simulate(cfg: &PdmpConfig, n_steps: usize) -> Result<PdmpTrace> {
    simulate_from(cfg, n_steps, None, None)
}

/// Runs `n_steps` jumps; missing start point or label are drawn from the
/// seeded generator.
pub fn simulate_from(
    cfg: &PdmpConfig,
    n_steps: usize,
    q0: Option<ProjPoint>,
    l0: Option<usize>,
) -> Result<PdmpTrace> {
    run(cfg, q0, l0, |trace| trace.jump_times.len() > n_steps)
}

/// Runs until the last jump time exceeds `horizon`.
pub fn simulate_until(cfg: &PdmpConfig, horizon: f64) -> Result<PdmpTrace> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(invalid(format!("horizon must be > 0, got {horizon}")));
    }
    run(cfg, None, None, |trace| trace.horizon > horizon)
}

fn run(
    cfg: &PdmpConfig,
    q0: Option<ProjPoint>,
    l0: Option<usize>,
    done: impl Fn(&PdmpTrace) -> bool,
) -> Result<PdmpTrace> {
    let cfg = cfg.clone().validated()?;
    let mut rng = cfg.rng();
    let d = cfg.dim();
    let q0 = match q0 {
        Some(p) if p.dim() != d => {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: p.dim(),
            })
        }
        Some(p) => p,
        None => random_point(d, &mut rng),
    };
    let l0 = match l0 {
        Some(l) if l >= cfg.modes.len() => {
            return Err(Error::ModeIndex {
                index: l,
                count: cfg.modes.len(),
            })
        }
        Some(l) => l,
        None => rng.gen_range(0..cfg.modes.len()),
    };
    let mut trace = PdmpTrace {
        jump_times: vec![0.0],
        labels: vec![l0],
        points: vec![q0],
        log_growth: vec![0.0],
        horizon: 0.0,
    };
    while !done(&trace) {
        let label = *trace.labels.last().expect("nonempty");
        let u = sample_dwell(cfg.lambda, cfg.tau, &mut rng)?;
        let a = cfg.modes.get(label)?;
        let (g, v) = bang_growth(a, u, trace.points.last().expect("nonempty").as_slice());
        let t = trace.horizon + u;
        trace.jump_times.push(t);
        trace.horizon = t;
        trace.points.push(ProjPoint::new(v)?);
        trace.log_growth.push(trace.log_growth.last().expect("nonempty") + g);
        trace.labels.push(next_label(&cfg.q[label], &mut rng));
    }
    Ok(trace)
}

/// Value with a standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

fn mean_stderr(xs: &[f64]) -> Estimate {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return Estimate {
            value: mean,
            stderr: f64::NAN,
        };
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Estimate {
        value: mean,
        stderr: (var / n).sqrt(),
    }
}

/// Contiguous step ranges of the trace (after `burn_in`) for batch means.
fn batches(trace: &PdmpTrace, burn_in: usize) -> Vec<(usize, usize)> {
    let n = trace.n_steps();
    let usable = n.saturating_sub(burn_in);
    let b = BATCHES.min(usable).max(1);
    (0..b)
        .map(|k| (burn_in + k * usable / b, burn_in + (k + 1) * usable / b))
        .filter(|(lo, hi)| hi > lo)
        .collect()
}

/// `(1/T) log‖Ψ_T x_0‖` over the whole trace, with a batch-means error.
pub fn chi_time_average(trace: &PdmpTrace) -> Result<Estimate> {
    if !(trace.horizon > 0.0) {
        return Err(invalid("trace has zero horizon"));
    }
    let value = trace.log_growth[trace.n_steps()] / trace.horizon;
    let rates: Vec<f64> = batches(trace, 0)
        .into_iter()
        .map(|(lo, hi)| {
            (trace.log_growth[hi] - trace.log_growth[lo])
                / (trace.jump_times[hi] - trace.jump_times[lo])
        })
        .collect();
    Ok(Estimate {
        value,
        stderr: mean_stderr(&rates).stderr,
    })
}

/// Per-jump growth `(1/n) log‖Φ_n x_0‖`.
pub fn chi_per_jump(trace: &PdmpTrace) -> Result<Estimate> {
    let n = trace.n_steps();
    if n == 0 {
        return Err(invalid("trace has no jumps"));
    }
    let rates: Vec<f64> = batches(trace, 0)
        .into_iter()
        .map(|(lo, hi)| (trace.log_growth[hi] - trace.log_growth[lo]) / (hi - lo) as f64)
        .collect();
    Ok(Estimate {
        value: trace.log_growth[n] / n as f64,
        stderr: mean_stderr(&rates).stderr,
    })
}

/// Per-jump and per-time exponents and their difference under the jump-rate
/// scaling `χ_time = χ_jump · λ/(τλ+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingCheck {
    pub chi_time: Estimate,
    pub chi_jump: Estimate,
    pub jump_rate: f64,
    /// `χ_time − χ_jump · rate`, with a batch-means error of the difference.
    pub difference: Estimate,
}

pub fn scaling_check(cfg: &PdmpConfig, trace: &PdmpTrace) -> Result<ScalingCheck> {
    let rate = cfg.jump_rate();
    let chi_time = chi_time_average(trace)?;
    let chi_jump = chi_per_jump(trace)?;
    let diffs: Vec<f64> = batches(trace, 0)
        .into_iter()
        .map(|(lo, hi)| {
            let g = trace.log_growth[hi] - trace.log_growth[lo];
            g / (trace.jump_times[hi] - trace.jump_times[lo]) - g / (hi - lo) as f64 * rate
        })
        .collect();
    Ok(ScalingCheck {
        chi_time,
        chi_jump,
        jump_rate: rate,
        difference: Estimate {
            value: chi_time.value - chi_jump.value * rate,
            stderr: mean_stderr(&diffs).stderr,
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureHistogram {
    pub dim: usize,
    pub n_bins: usize,
    pub n_modes: usize,
    /// `counts[bin][mode]`.
    pub counts: Vec<Vec<u64>>,
    pub total: u64,
    /// Bin centres on RP^2 for `dim = 3`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cloud: Option<Vec<[f64; 3]>>,
}

/// `n` roughly uniform points on the upper unit hemisphere.
pub fn fibonacci_hemisphere(n: usize) -> Vec<[f64; 3]> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - (k as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

impl MeasureHistogram {
    pub fn empty(dim: usize, n_bins: usize, n_modes: usize) -> Result<Self> {
        if n_bins == 0 || n_modes == 0 {
            return Err(invalid("histogram needs bins and modes"));
        }
        let cloud = match dim {
            2 => None,
            3 => Some(fibonacci_hemisphere(n_bins)),
            _ => return Err(invalid(format!("histograms support d = 2 or 3, got {dim}"))),
        };
        Ok(MeasureHistogram {
            dim,
            n_bins,
            n_modes,
            counts: vec![vec![0; n_modes]; n_bins],
            total: 0,
            cloud,
        })
    }

    pub fn bin_of(&self, p: &ProjPoint) -> usize {
        match &self.cloud {
            None => {
                let theta = p.angle().map_or(0.0, Angle::value);
                ((theta / PI * self.n_bins as f64) as usize).min(self.n_bins - 1)
            }
            Some(cloud) => {
                let v = p.as_slice();
                let mut best = 0;
                let mut best_dot = -1.0;
                for (i, c) in cloud.iter().enumerate() {
                    let dot = (c[0] * v[0] + c[1] * v[1] + c[2] * v[2]).abs();
                    if dot > best_dot {
                        best_dot = dot;
                        best = i;
                    }
                }
                best
            }
        }
    }

    pub fn add(&mut self, p: &ProjPoint, label: usize) {
        let b = self.bin_of(p);
        self.counts[b][label] += 1;
        self.total += 1;
    }

    /// Probabilities `counts / total`, same layout as `counts`.
    pub fn probabilities(&self) -> Vec<Vec<f64>> {
        let t = self.total.max(1) as f64;
        self.counts
            .iter()
            .map(|row| row.iter().map(|c| *c as f64 / t).collect())
            .collect()
    }

    /// Angle marginal, summed over modes.
    pub fn marginal(&self) -> Vec<u64> {
        self.counts.iter().map(|row| row.iter().sum()).collect()
    }

    /// CSV `bin,mode,theta_lo,theta_hi,prob`, or `bin,mode,x,y,z,prob` on
    /// RP^2.
    pub fn to_csv(&self) -> String {
        let probs = self.probabilities();
        let mut out = match self.cloud {
            None => String::from("bin,mode,theta_lo,theta_hi,prob\n"),
            Some(_) => String::from("bin,mode,x,y,z,prob\n"),
        };
        let h = PI / self.n_bins as f64;
        for (b, row) in probs.iter().enumerate() {
            for (m, p) in row.iter().enumerate() {
                match &self.cloud {
                    None => out.push_str(&format!(
                        "{b},{m},{:.16e},{:.16e},{p:.16e}\n",
                        b as f64 * h,
                        (b + 1) as f64 * h
                    )),
                    Some(c) => out.push_str(&format!(
                        "{b},{m},{:.16e},{:.16e},{:.16e},{p:.16e}\n",
                        c[b][0], c[b][1], c[b][2]
                    )),
                }
            }
        }
        out
    }

    /// A point drawn from the histogram: uniform within the angle bin on
    /// RP^1, the bin centre on RP^2.
    fn draw<R: Rng + ?Sized>(&self, cumulative: &[f64], rng: &mut R) -> (ProjPoint, usize) {
        let u: f64 = rng.gen::<f64>() * cumulative.last().copied().unwrap_or(0.0);
        let idx = cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1);
        let (bin, mode) = (idx / self.n_modes, idx % self.n_modes);
        let p = match &self.cloud {
            None => {
                let h = PI / self.n_bins as f64;
                ProjPoint::from_angle((bin as f64 + rng.gen::<f64>()) * h)
            }
            Some(c) => ProjPoint::new(c[bin].to_vec()).expect("unit vector"),
        };
        (p, mode)
    }
}

/// Histogram of `(Q_n, L_n)` for `n > burn_in`.
pub fn invariant_histogram(trace: &PdmpTrace, burn_in: usize, n_bins: usize) -> Result<MeasureHistogram> {
    if burn_in >= trace.n_steps() {
        return Err(invalid(format!(
            "burn-in {burn_in} must be below the number of steps {}",
            trace.n_steps()
        )));
    }
    let dim = trace.points[0].dim();
    let n_modes = trace.labels.iter().max().map_or(1, |m| m + 1);
    let mut h = MeasureHistogram::empty(dim, n_bins, n_modes)?;
    for n in burn_in + 1..trace.jump_times.len() {
        h.add(&trace.points[n], trace.labels[n]);
    }
    Ok(h)
}

/// Default burn-in: 10% of the steps.
pub fn default_burn_in(trace: &PdmpTrace) -> usize {
    trace.n_steps() / 10
}

/// `⟨θ(t), A θ(t)⟩` along the projected orbit of `v`.
enum RadialRate {
    Planar(PlanarFlow),
    General(Mat),
}

impl RadialRate {
    fn new(a: &Mat) -> Result<Self> {
        Ok(if a.dim() == 2 {
            RadialRate::Planar(PlanarFlow::new(a)?)
        } else {
            RadialRate::General(a.clone())
        })
    }

    fn at(&self, t: f64, v: &[f64]) -> f64 {
        match self {
            RadialRate::Planar(f) => f.radial_rate(t, v),
            RadialRate::General(a) => {
                let (_, u) = bang_growth(a, t, v);
                let au = a.matvec(&u);
                u.iter().zip(&au).map(|(x, y)| x * y).sum()
            }
        }
    }

    fn point(&self, t: f64, v: &[f64]) -> ProjPoint {
        match self {
            RadialRate::Planar(f) => {
                let u = f.direction(t, v);
                ProjPoint::new(u.to_vec()).expect("unit vector")
            }
            RadialRate::General(a) => {
                ProjPoint::new(expm_unchecked(a, t).matvec(v)).expect("invertible flow")
            }
        }
    }
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    if b <= a {
        return 0.0;
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, SIMPSON_DEPTH)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiIntegral {
    /// `(λ/(τλ+1)) · mean(I)`.
    pub value: f64,
    pub stderr: f64,
    /// `mean(I) / mean(s)`; exact for scalar modes.
    pub self_normalized: f64,
    /// The same estimator with integrand `≡ 1`; should be 1.
    pub normalization: Estimate,
    pub n_samples: usize,
    /// `θ` at a uniform time inside each sample's integration window.
    #[serde(skip)]
    pub nu_samples: Vec<(ProjPoint, usize)>,
}

/// Monte Carlo over `ν`: draw `(θ, i)` from `mu`, `s ~ tau + Exp(lambda)`,
/// integrate `⟨θ(t), A_i θ(t)⟩` over `[0, s]`.
pub fn chi_integral<R: Rng + ?Sized>(
    cfg: &PdmpConfig,
    mu: &MeasureHistogram,
    n_mc: usize,
    rng: &mut R,
) -> Result<ChiIntegral> {
    let cfg = cfg.clone().validated()?;
    if mu.total == 0 {
        return Err(Error::EmptySet);
    }
    if mu.dim != cfg.dim() || mu.n_modes > cfg.modes.len() {
        return Err(Error::DimensionMismatch {
            expected: cfg.dim(),
            got: mu.dim,
        });
    }
    if n_mc < 2 {
        return Err(invalid("n_mc must be at least 2"));
    }
    let rates: Vec<RadialRate> = cfg
        .modes
        .modes()
        .iter()
        .map(RadialRate::new)
        .collect::<Result<_>>()?;
    let mut cumulative = Vec::with_capacity(mu.n_bins * mu.n_modes);
    let mut acc = 0.0;
    for row in &mu.counts {
        for c in row {
            acc += *c as f64;
            cumulative.push(acc);
        }
    }
    let rate = cfg.jump_rate();
    let mut integrals = Vec::with_capacity(n_mc);
    let mut lengths = Vec::with_capacity(n_mc);
    let mut nu_samples = Vec::with_capacity(n_mc);
    for _ in 0..n_mc {
        let (theta, mode) = mu.draw(&cumulative, rng);
        let s = sample_dwell(cfg.lambda, cfg.tau, rng)?;
        let flow = &rates[mode];
        let v = theta.as_slice();
        let integral = adaptive_simpson(&|t| flow.at(t, v), 0.0, s, SIMPSON_TOL);
        let t_nu = rng.gen::<f64>() * s;
        nu_samples.push((flow.point(t_nu, v), mode));
        integrals.push(rate * integral);
        lengths.push(rate * s);
    }
    let est = mean_stderr(&integrals);
    let norm = mean_stderr(&lengths);
    Ok(ChiIntegral {
        value: est.value,
        stderr: est.stderr,
        self_normalized: est.value / norm.value,
        normalization: norm,
        n_samples: n_mc,
        nu_samples,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportReport {
    pub n_samples: usize,
    pub outside: usize,
    pub outside_fraction: f64,
    pub reference_cells: usize,
}

fn support_report<'a>(points: impl Iterator<Item = &'a ProjPoint>, set: &GridSet) -> SupportReport {
    let mut n = 0;
    let mut outside = 0;
    for p in points {
        n += 1;
        let theta = p.angle().map_or(0.0, Angle::value);
        if !set.contains_angle(theta) {
            outside += 1;
        }
    }
    SupportReport {
        n_samples: n,
        outside,
        outside_fraction: if n == 0 { 0.0 } else { outside as f64 / n as f64 },
        reference_cells: set.count(),
    }
}

/// Fraction of post-burn-in chain points outside `d` thickened by
/// `slack_cells` grid cells.
pub fn mu_support_check(trace: &PdmpTrace, burn_in: usize, d: &GridSet, slack_cells: usize) -> Result<SupportReport> {
    if trace.points[0].dim() != 2 {
        return Err(invalid("support checks need d = 2"));
    }
    let set = d.thickened(slack_cells);
    Ok(support_report(trace.points.iter().skip(burn_in + 1), &set))
}

/// Fraction of `ν`-samples outside `⋃_i ⋃_{t∈[0,τ]} e^{tA_i}(D)`.
pub fn nu_support_check(cfg: &PdmpConfig, nu_samples: &[(ProjPoint, usize)], d: &GridSet) -> Result<SupportReport> {
    if cfg.dim() != 2 {
        return Err(invalid("support checks need d = 2"));
    }
    let thick = flow_thicken(d, &cfg.modes, cfg.tau, 32)?;
    Ok(support_report(nu_samples.iter().map(|(p, _)| p), &thick))
}

/// `ν`-samples drawn from the empirical chain itself: a random post-burn-in
/// state, a fresh dwell `s`, and the point at a uniform time in `[0, s]`.
pub fn nu_samples_from_trace<R: Rng + ?Sized>(
    cfg: &PdmpConfig,
    trace: &PdmpTrace,
    burn_in: usize,
    n_samples: usize,
    rng: &mut R,
) -> Result<Vec<(ProjPoint, usize)>> {
    if burn_in >= trace.n_steps() {
        return Err(invalid("burn-in leaves no samples"));
    }
    let rates: Vec<RadialRate> = cfg
        .modes
        .modes()
        .iter()
        .map(RadialRate::new)
        .collect::<Result<_>>()?;
    (0..n_samples)
        .map(|_| {
            let n = rng.gen_range(burn_in + 1..trace.jump_times.len());
            let s = sample_dwell(cfg.lambda, cfg.tau, rng)?;
            let t = rng.gen::<f64>() * s;
            let mode = trace.labels[n];
            Ok((rates[mode].point(t, trace.points[n].as_slice()), mode))
        })
        .collect()
}
