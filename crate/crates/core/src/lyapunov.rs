//! Uniform exponential rate of a dwell-time switched system: random signal
//! search, periodization, irreducibility and block reduction.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::matrix::{eigenvalues, expm_unchecked, spectral_abscissa, LogScaled, Mat, ModeSet};
use crate::projective::ProjPoint;
use crate::reach::duration_grid;
use crate::signals::{sample_random_with, Bang, DwellSignal, PeriodicSignal};

/// Bangs with `‖tA‖₁` above this are applied in pieces.
const PIECE_NORM: f64 = 50.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Random,
    Periodic,
    SingleModeOracle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    Signal(DwellSignal),
    Periodic(PeriodicSignal),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub evaluations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_signals: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_bangs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_samples: Option<usize>,
}

/// Best value found after a given number of objective evaluations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub budget: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapEstimate {
    pub value: f64,
    pub method: Method,
    pub witness: Witness,
    pub stderr: Option<f64>,
    pub budget: Budget,
    /// Set when the leading monodromy eigenvalue is complex, so the witness
    /// is only approximately projectively periodic.
    #[serde(default)]
    pub approximate: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub convergence: Vec<ConvergencePoint>,
}

/// `λ` of a single mode: its spectral abscissa.
pub fn single_mode_oracle(a: &Mat) -> Result<LyapEstimate> {
    Ok(LyapEstimate {
        value: spectral_abscissa(a)?,
        method: Method::SingleModeOracle,
        witness: Witness::Signal(DwellSignal::new(0.0, vec![Bang::new(0, 1.0)])?),
        stderr: None,
        budget: Budget::default(),
        approximate: false,
        convergence: Vec::new(),
    })
}

/// `lhs = e^{tA} · acc`, splitting large bangs.
fn apply_bang(acc: &LogScaled, a: &Mat, t: f64) -> LogScaled {
    let size = a.norm_1() * t;
    let pieces = if size > PIECE_NORM {
        (size / PIECE_NORM).ceil() as usize
    } else {
        1
    };
    let step = expm_unchecked(a, t / pieces as f64);
    let mut out = acc.clone();
    for _ in 0..pieces {
        out = out.premul(&step);
    }
    out
}

fn bang_matrix(a: &Mat, t: f64) -> LogScaled {
    apply_bang(&LogScaled::identity(a.dim()), a, t)
}

fn signal_product(sig: &DwellSignal, modes: &ModeSet) -> Result<LogScaled> {
    let mut acc = LogScaled::identity(modes.dim());
    for b in sig.bangs() {
        acc = apply_bang(&acc, modes.get(b.mode)?, b.duration);
    }
    Ok(acc)
}

/// `log ρ(Φ) / T` for one period block.
pub fn periodic_value(block: &DwellSignal, modes: &ModeSet) -> Result<f64> {
    let t = block.total_duration();
    if !(t > 0.0) {
        return Err(invalid("period must be positive"));
    }
    Ok(signal_product(block, modes)?.log_spectral_radius()? / t)
}

/// `max_j log‖Φ e_j‖ / T`.
pub fn signal_growth_rate(sig: &DwellSignal, modes: &ModeSet) -> Result<f64> {
    let t = sig.total_duration();
    if !(t > 0.0) {
        return Err(invalid("signal must have positive duration"));
    }
    Ok(column_rate(&signal_product(sig, modes)?, t))
}

fn column_rate(phi: &LogScaled, t: f64) -> f64 {
    phi.log_column_norms()
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
        / t
}

fn log_rho_of(mats: &[&LogScaled]) -> f64 {
    let mut acc = LogScaled::identity(mats[0].unit.dim());
    for m in mats {
        acc = m.postmul(&acc);
    }
    acc.log_spectral_radius().unwrap_or(f64::NEG_INFINITY)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PeriodicSearch {
    pub max_bangs: usize,
    pub duration_samples: usize,
    pub refine_iters: usize,
    pub seed: u64,
    /// Longest bang; defaults to `10 (tau + 1)`.
    pub t_max: Option<f64>,
    /// Explicit duration samples shared across dwell-times; entries below
    /// `tau` are dropped.
    pub duration_grid: Option<Vec<f64>>,
    /// Sequences sampled per length above 4.
    pub random_sequences: usize,
    pub workers: usize,
}

impl Default for PeriodicSearch {
    fn default() -> Self {
        PeriodicSearch {
            max_bangs: 4,
            duration_samples: 12,
            refine_iters: 20,
            seed: 0,
            t_max: None,
            duration_grid: None,
            random_sequences: 200,
            workers: 1,
        }
    }
}

/// Duration combinations per sequence above which a random subset is used.
const MAX_COMBOS: usize = 200_000;
const GOLDEN_TOL: f64 = 1e-9;

struct Candidate {
    value: f64,
    seq: Vec<usize>,
    durations: Vec<f64>,
}

/// Mode sequences of length `len` with no equal neighbours (cyclically), up
/// to rotation.
fn cyclic_sequences(n_modes: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if len == 1 {
        return (0..n_modes).map(|i| vec![i]).collect();
    }
    let total = n_modes.pow(len as u32);
    for code in 0..total {
        let mut seq = Vec::with_capacity(len);
        let mut c = code;
        for _ in 0..len {
            seq.push(c % n_modes);
            c /= n_modes;
        }
        if (0..len).any(|i| seq[i] == seq[(i + 1) % len]) {
            continue;
        }
        let canonical = (1..len).all(|r| {
            let rotated: Vec<usize> = (0..len).map(|i| seq[(i + r) % len]).collect();
            seq <= rotated
        });
        if canonical {
            out.push(seq);
        }
    }
    out
}

fn random_sequence(rng: &mut ChaCha8Rng, n_modes: usize, len: usize) -> Option<Vec<usize>> {
    if n_modes < 2 {
        return None;
    }
    for _ in 0..100 {
        let mut seq = vec![rng.gen_range(0..n_modes)];
        while seq.len() < len {
            let prev = *seq.last().unwrap();
            seq.push((prev + rng.gen_range(1..n_modes)) % n_modes);
        }
        if seq[0] != seq[len - 1] {
            return Some(seq);
        }
    }
    None
}

fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > GOLDEN_TOL {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Periodization estimate of `λ_τ(S)`: maximizes `log ρ(Φ)/T` over period
/// blocks of at most `max_bangs` bangs.
pub fn lambda_periodic(modes: &ModeSet, tau: f64, search: &PeriodicSearch) -> Result<LyapEstimate> {
    lambda_periodic_warm(modes, tau, search, &[])
}

/// [`lambda_periodic`] with extra starting blocks; blocks with a bang
/// shorter than `tau` are ignored.
pub fn lambda_periodic_warm(
    modes: &ModeSet,
    tau: f64,
    search: &PeriodicSearch,
    warm: &[DwellSignal],
) -> Result<LyapEstimate> {
    if modes.is_empty() {
        return Err(Error::EmptySet);
    }
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(invalid(format!("tau must be >= 0, got {tau}")));
    }
    if search.max_bangs == 0 || search.duration_samples < 2 {
        return Err(invalid("max_bangs must be >= 1 and duration_samples >= 2"));
    }
    let t_max = search.t_max.unwrap_or(10.0 * (tau + 1.0));
    if !(t_max.is_finite() && t_max > tau) {
        return Err(invalid(format!("t_max ({t_max}) must exceed tau ({tau})")));
    }
    let grid: Vec<f64> = match &search.duration_grid {
        Some(g) => g
            .iter()
            .copied()
            .filter(|&s| s >= tau && s > 0.0 && s <= t_max)
            .collect(),
        None => duration_grid(tau, t_max, search.duration_samples)
            .into_iter()
            .filter(|&s| s > 0.0)
            .collect(),
    };
    if grid.is_empty() {
        return Err(invalid("no duration samples at or above tau"));
    }
    let lower = if tau > 0.0 { tau } else { grid[0].min(t_max) };
    let m = modes.len();
    let cache: Vec<Vec<LogScaled>> = modes
        .modes()
        .iter()
        .map(|a| grid.iter().map(|&s| bang_matrix(a, s)).collect())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(search.seed);
    let mut sequences = Vec::new();
    for len in 1..=search.max_bangs {
        if len <= 4 {
            sequences.extend(cyclic_sequences(m, len));
        } else {
            for _ in 0..search.random_sequences {
                if let Some(seq) = random_sequence(&mut rng, m, len) {
                    sequences.push(seq);
                }
            }
        }
    }

    // grid stage; each sequence is an independent work item
    let k = grid.len();
    let seq_seeds: Vec<u64> = sequences.iter().map(|_| rng.gen()).collect();
    let eval_sequence = |idx: usize| -> (Vec<Candidate>, usize) {
        let seq = &sequences[idx];
        let len = seq.len();
        let combos = k.checked_pow(len as u32).unwrap_or(usize::MAX);
        let mut best: Vec<Candidate> = Vec::new();
        let consider = |ks: &[usize], best: &mut Vec<Candidate>| {
            if repeats_shorter_block(seq, ks) || !canonical_rotation(seq, ks) {
                return;
            }
            let mats: Vec<&LogScaled> = seq.iter().zip(ks).map(|(&i, &kk)| &cache[i][kk]).collect();
            let t: f64 = ks.iter().map(|&kk| grid[kk]).sum();
            let value = log_rho_of(&mats) / t;
            push_top3(
                best,
                Candidate {
                    value,
                    seq: seq.clone(),
                    durations: ks.iter().map(|&kk| grid[kk]).collect(),
                },
            );
        };
        let mut ks = vec![0usize; len];
        let evaluations;
        if combos <= MAX_COMBOS {
            for code in 0..combos {
                let mut c = code;
                for slot in ks.iter_mut() {
                    *slot = c % k;
                    c /= k;
                }
                consider(&ks, &mut best);
            }
            evaluations = combos;
        } else {
            let mut local = ChaCha8Rng::seed_from_u64(seq_seeds[idx]);
            for _ in 0..MAX_COMBOS {
                for slot in ks.iter_mut() {
                    *slot = local.gen_range(0..k);
                }
                consider(&ks, &mut best);
            }
            evaluations = MAX_COMBOS;
        }
        (best, evaluations)
    };
    let results = run_indexed(sequences.len(), search.workers, eval_sequence);

    let mut evaluations = 0;
    let mut top: Vec<Candidate> = Vec::new();
    let mut convergence = Vec::new();
    for (cands, evals) in results {
        evaluations += evals;
        for c in cands {
            push_top3(&mut top, c);
        }
        convergence.push(ConvergencePoint {
            budget: evaluations,
            value: top[0].value,
        });
    }
    for block in warm {
        let merged = block.merged();
        if merged.bangs().iter().all(|b| b.duration >= tau && b.mode < m) && !merged.is_empty() {
            let value = periodic_value(&merged, modes)?;
            evaluations += 1;
            push_top3(
                &mut top,
                Candidate {
                    value,
                    seq: merged.bangs().iter().map(|b| b.mode).collect(),
                    durations: merged.bangs().iter().map(|b| b.duration).collect(),
                },
            );
        }
    }

    // coordinate ascent from the best grid points, each line search spanning
    // the neighbouring grid samples
    let ratio = grid
        .windows(2)
        .map(|w| w[1] / w[0])
        .fold(1.5, f64::max);
    let mut refined = Vec::new();
    for cand in top {
        let (cand, evals) = refine(modes, cand, lower, t_max, ratio, search.refine_iters)?;
        evaluations += evals;
        refined.push(cand);
    }
    refined.sort_by(|a, b| b.value.total_cmp(&a.value));
    let best = refined.into_iter().next().ok_or(Error::EmptySet)?;

    let bangs: Vec<Bang> = best
        .seq
        .iter()
        .zip(&best.durations)
        .map(|(&i, &d)| Bang::new(i, d))
        .collect();
    let block = DwellSignal::new(tau, bangs)?;
    let (witness, approximate) = periodic_witness(block, modes)?;
    let value = periodic_value(&witness.period_block, modes)?;
    convergence.push(ConvergencePoint {
        budget: evaluations,
        value,
    });
    Ok(LyapEstimate {
        value,
        method: Method::Periodic,
        witness: Witness::Periodic(witness),
        stderr: None,
        budget: Budget {
            evaluations,
            max_bangs: Some(search.max_bangs),
            duration_samples: Some(grid.len()),
            ..Budget::default()
        },
        approximate,
        convergence,
    })
}

/// Whether the block is several copies of a shorter one.
fn repeats_shorter_block(seq: &[usize], ks: &[usize]) -> bool {
    let len = seq.len();
    (1..len).any(|p| {
        len % p == 0 && (p..len).all(|i| seq[i] == seq[i - p] && ks[i] == ks[i - p])
    })
}

/// Whether no rotation preserving the mode sequence gives a
/// lexicographically smaller duration pattern.
fn canonical_rotation(seq: &[usize], ks: &[usize]) -> bool {
    let len = seq.len();
    (1..len).all(|r| {
        let same_seq = (0..len).all(|i| seq[(i + r) % len] == seq[i]);
        !same_seq || (0..len).map(|i| ks[(i + r) % len]).cmp(ks.iter().copied()) != std::cmp::Ordering::Less
    })
}

fn push_top3(top: &mut Vec<Candidate>, c: Candidate) {
    if !c.value.is_finite() {
        return;
    }
    let pos = top.iter().position(|t| c.value > t.value).unwrap_or(top.len());
    if pos < 3 {
        top.insert(pos, c);
        top.truncate(3);
    }
}

fn refine(
    modes: &ModeSet,
    mut cand: Candidate,
    lower: f64,
    t_max: f64,
    ratio: f64,
    iters: usize,
) -> Result<(Candidate, usize)> {
    let evaluations = std::cell::Cell::new(0usize);
    let mode_mats: Vec<&Mat> = cand
        .seq
        .iter()
        .map(|&i| modes.get(i))
        .collect::<Result<_>>()?;
    let objective = |durs: &[f64]| {
        evaluations.set(evaluations.get() + 1);
        let mats: Vec<LogScaled> = mode_mats
            .iter()
            .zip(durs)
            .map(|(a, &d)| bang_matrix(a, d))
            .collect();
        log_rho_of(&mats.iter().collect::<Vec<_>>()) / durs.iter().sum::<f64>()
    };
    cand.value = objective(&cand.durations);
    for _ in 0..iters {
        let start = cand.durations.clone();
        let before = cand.value;
        for c in 0..cand.seq.len() {
            let x0 = cand.durations[c];
            let mut trial = cand.durations.clone();
            let line = |x: f64| {
                let mut t = trial.clone();
                t[c] = x;
                objective(&t)
            };
            let (x, fx) = golden_max(line, (x0 / ratio).max(lower), (x0 * ratio).min(t_max));
            if fx > cand.value {
                trial[c] = x;
                cand.durations = trial;
                cand.value = fx;
            }
        }
        // pattern move along the sweep's displacement, for ridges
        let dir: Vec<f64> = cand.durations.iter().zip(&start).map(|(a, b)| a - b).collect();
        let s_max = dir
            .iter()
            .zip(&cand.durations)
            .filter(|(d, _)| d.abs() > 0.0)
            .map(|(d, x)| if *d > 0.0 { (t_max - x) / d } else { (lower - x) / d })
            .fold(16.0, f64::min)
            .max(0.0);
        if s_max > 0.0 {
            let along = |s: f64| -> Vec<f64> {
                cand.durations
                    .iter()
                    .zip(&dir)
                    .map(|(x, d)| (x + s * d).clamp(lower, t_max))
                    .collect()
            };
            let (s, fs) = golden_max(|s| objective(&along(s)), 0.0, s_max);
            if fs > cand.value {
                cand.durations = along(s);
                cand.value = fs;
            }
        }
        if !(cand.value > before) {
            break;
        }
    }
    if iters > 0 {
        polish(&objective, &mut cand, lower, t_max);
    }
    Ok((cand, evaluations.get()))
}

/// Compass search over coordinate and pairwise diagonal directions with a
/// halving step, which also climbs ridges where the spectral radius is not
/// smooth.
fn polish(objective: &impl Fn(&[f64]) -> f64, cand: &mut Candidate, lower: f64, t_max: f64) {
    let len = cand.durations.len();
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for i in 0..len {
        for sign in [1.0, -1.0] {
            let mut d = vec![0.0; len];
            d[i] = sign;
            dirs.push(d);
        }
        for j in i + 1..len {
            for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let mut d = vec![0.0; len];
                d[i] = si;
                d[j] = sj;
                dirs.push(d);
            }
        }
    }
    let mean = cand.durations.iter().sum::<f64>() / len as f64;
    let mut step = 0.05 * mean;
    while step > 1e-11 * mean.max(1.0) {
        let mut moved = false;
        for d in &dirs {
            let trial: Vec<f64> = cand.durations.iter().zip(d).map(|(x, e)| x + step * e).collect();
            if trial.iter().any(|x| *x < lower || *x > t_max) {
                continue;
            }
            let v = objective(&trial);
            if v > cand.value {
                cand.durations = trial;
                cand.value = v;
                moved = true;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
}

/// Attaches the leading eigenvector of the monodromy as projective witness,
/// or doubles the block when the leading eigenvalue is complex.
fn periodic_witness(block: DwellSignal, modes: &ModeSet) -> Result<(PeriodicSignal, bool)> {
    let phi = signal_product(&block, modes)?.unit;
    let eig = eigenvalues(&phi)?;
    let lead = eig
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .ok_or(Error::EmptySet)?;
    let rho = lead.norm();
    if lead.im.abs() > 1e-9 * rho.max(f64::MIN_POSITIVE) {
        let doubled = block.concat(&block)?;
        return Ok((PeriodicSignal::new(doubled, None)?, true));
    }
    let shifted = phi.shifted(-lead.re).to_dmatrix();
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.ok_or(Error::NoConvergence)?;
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or(Error::EmptySet)?;
    let x0 = ProjPoint::new(v_t.row(idx).iter().copied().collect())?;
    Ok((PeriodicSignal::new(block, Some(x0))?, false))
}

/// Runs `f(0..count)` on `workers` threads with contiguous index blocks,
/// returning results in index order.
fn run_indexed<T: Send>(count: usize, workers: usize, f: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let workers = workers.max(1).min(count.max(1));
    if workers == 1 {
        return (0..count).map(&f).collect();
    }
    let chunk = count.div_ceil(workers);
    let f = &f;
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                scope.spawn(move || {
                    (w * chunk..((w + 1) * chunk).min(count))
                        .map(f)
                        .collect::<Vec<T>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}

/// Sweeps dwell-times from the largest down, warm-starting each search with
/// the earlier witnesses (admissible for every smaller dwell-time).
pub fn lambda_periodic_sweep(
    modes: &ModeSet,
    taus: &[f64],
    search: &PeriodicSearch,
) -> Result<Vec<LyapEstimate>> {
    let mut order: Vec<usize> = (0..taus.len()).collect();
    order.sort_by(|&i, &j| taus[j].total_cmp(&taus[i]));
    let mut warm: Vec<DwellSignal> = Vec::new();
    let mut out: Vec<Option<LyapEstimate>> = vec![None; taus.len()];
    for i in order {
        let est = lambda_periodic_warm(modes, taus[i], search, &warm)?;
        if let Witness::Periodic(p) = &est.witness {
            warm.push(p.period_block.clone());
        }
        out[i] = Some(est);
    }
    Ok(out.into_iter().map(|e| e.expect("every tau evaluated")).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RandomSearch {
    pub n_signals: usize,
    pub horizon: f64,
    pub seed: u64,
    pub hill_climb_sweeps: usize,
    pub workers: usize,
}

impl Default for RandomSearch {
    fn default() -> Self {
        RandomSearch {
            n_signals: 2000,
            horizon: 200.0,
            seed: 0,
            hill_climb_sweeps: 20,
            workers: 1,
        }
    }
}

pub fn lambda_random(
    modes: &ModeSet,
    tau: f64,
    n_signals: usize,
    horizon: f64,
    seed: u64,
) -> Result<LyapEstimate> {
    lambda_random_with(
        modes,
        tau,
        &RandomSearch {
            n_signals,
            horizon,
            seed,
            ..RandomSearch::default()
        },
    )
}

/// Signal `k` of a random search.
///
/// Each signal uses its own ChaCha8 stream and a log-uniform bang scale in
/// `[0.1, horizon]`, so that both fast switching and long bangs are explored.
pub fn random_search_signal(
    tau: f64,
    n_modes: usize,
    horizon: f64,
    seed: u64,
    k: usize,
) -> Result<DwellSignal> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    let lo = 0.1f64.min(horizon).ln();
    let hi = horizon.ln();
    let max_extra = if hi > lo { rng.gen_range(lo..hi).exp() } else { horizon };
    sample_random_with(&mut rng, tau, n_modes, horizon, max_extra)
}

/// Random-signal estimate: the best `max_j log‖Φ(T) e_j‖ / T` over sampled
/// signals, followed by hill-climbing on the best signal's durations.
pub fn lambda_random_with(modes: &ModeSet, tau: f64, search: &RandomSearch) -> Result<LyapEstimate> {
    if modes.is_empty() {
        return Err(Error::EmptySet);
    }
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(invalid(format!("tau must be >= 0, got {tau}")));
    }
    let horizon = search.horizon;
    if !(horizon.is_finite() && horizon >= 10.0 * (tau + 1.0)) {
        return Err(invalid(format!(
            "horizon {horizon} must be at least 10 (tau + 1) = {}",
            10.0 * (tau + 1.0)
        )));
    }
    if search.n_signals == 0 {
        return Err(invalid("n_signals must be positive"));
    }
    let m = modes.len();
    let values = run_indexed(search.n_signals, search.workers, |k| -> Result<f64> {
        let sig = random_search_signal(tau, m, horizon, search.seed, k)?;
        signal_growth_rate(&sig, modes)
    });
    let mut best_k = 0;
    let mut best = f64::NEG_INFINITY;
    let mut convergence = Vec::new();
    for (k, v) in values.into_iter().enumerate() {
        let v = v?;
        if v > best {
            best = v;
            best_k = k;
        }
        if (k + 1).is_power_of_two() || k + 1 == search.n_signals {
            convergence.push(ConvergencePoint {
                budget: k + 1,
                value: best,
            });
        }
    }
    let sig = random_search_signal(tau, m, horizon, search.seed, best_k)?.merged();
    let (sig, value, climbs) = hill_climb(&sig, modes, search.hill_climb_sweeps)?;
    let evaluations = search.n_signals + climbs;
    convergence.push(ConvergencePoint {
        budget: evaluations,
        value,
    });
    Ok(LyapEstimate {
        value,
        method: Method::Random,
        witness: Witness::Signal(sig),
        stderr: None,
        budget: Budget {
            evaluations,
            n_signals: Some(search.n_signals),
            horizon: Some(horizon),
            ..Budget::default()
        },
        approximate: false,
        convergence,
    })
}

/// Coordinate moves on every bang duration but the last, which absorbs the
/// change so the total stays fixed.
fn hill_climb(sig: &DwellSignal, modes: &ModeSet, sweeps: usize) -> Result<(DwellSignal, f64, usize)> {
    let horizon = sig.total_duration();
    let mut value = signal_growth_rate(sig, modes)?;
    let n = sig.bangs().len();
    if n < 2 || sweeps == 0 {
        return Ok((sig.clone(), value, 0));
    }
    let tau = sig.tau();
    let floor = tau.max(1e-9);
    let mut durs: Vec<f64> = sig.bangs().iter().map(|b| b.duration).collect();
    let mode_of = |i: usize| modes.get(sig.bangs()[i].mode);
    let mut mats: Vec<LogScaled> = (0..n)
        .map(|i| Ok(bang_matrix(mode_of(i)?, durs[i])))
        .collect::<Result<_>>()?;
    let last = n - 1;
    let last_mode = mode_of(last)?;
    let mut evaluations = 0;
    for _ in 0..sweeps {
        // suffix[i] = product of bangs i..last-1
        let mut suffix = vec![LogScaled::identity(modes.dim()); n];
        for i in (0..last).rev() {
            suffix[i] = suffix[i + 1].postmul(&mats[i]);
        }
        let mut prefix = LogScaled::identity(modes.dim());
        let mut improved = false;
        for i in 0..last {
            let slack = durs[last] - floor;
            let d = durs[i];
            let hi = (d + slack).max(floor);
            let mut candidates = vec![floor, 0.5 * d, 0.8 * d, 0.95 * d, 1.05 * d, 1.25 * d, 2.0 * d, hi];
            candidates.iter_mut().for_each(|x| *x = x.clamp(floor, hi));
            let a = mode_of(i)?;
            let mut best_move: Option<(f64, f64, LogScaled)> = None;
            for x in candidates {
                if (x - d).abs() <= 1e-12 * horizon {
                    continue;
                }
                let new_last = durs[last] + d - x;
                let ex = bang_matrix(a, x);
                let phi = bang_matrix(last_mode, new_last)
                    .postmul(&suffix[i + 1])
                    .postmul(&ex)
                    .postmul(&prefix);
                let v = column_rate(&phi, horizon);
                evaluations += 1;
                if v > value + 1e-13 && best_move.as_ref().is_none_or(|b| v > b.1) {
                    best_move = Some((x, v, ex));
                }
            }
            if let Some((x, v, ex)) = best_move {
                durs[last] += durs[i] - x;
                durs[i] = x;
                mats[i] = ex;
                mats[last] = bang_matrix(last_mode, durs[last]);
                value = v;
                improved = true;
            }
            prefix = mats[i].postmul(&prefix);
        }
        if !improved {
            break;
        }
    }
    let bangs = sig
        .bangs()
        .iter()
        .zip(&durs)
        .map(|(b, &d)| Bang::new(b.mode, d))
        .collect();
    let out = DwellSignal::new(tau, bangs)?;
    // recompute on the final signal so the value matches its witness
    let value = signal_growth_rate(&out, modes)?;
    Ok((out, value, evaluations))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IrreducibilityReport {
    pub algebra_dim: usize,
    pub is_irreducible: bool,
    /// Orthonormal basis of a common invariant subspace, when one was found.
    pub invariant_subspace_basis: Option<Vec<Vec<f64>>>,
}

const SPAN_TOL: f64 = 1e-10;
const INVARIANCE_TOL: f64 = 1e-8;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Orthogonalizes `v` against the orthonormal `basis` (twice) and returns
/// the normalized residual if its relative size exceeds `tol`.
fn gram_schmidt(basis: &[Vec<f64>], v: &[f64], tol: f64) -> Option<Vec<f64>> {
    let scale = norm(v);
    if scale == 0.0 {
        return None;
    }
    let mut r = v.to_vec();
    for _ in 0..2 {
        for b in basis {
            let c = dot(&r, b);
            r.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
    let rn = norm(&r);
    if rn > tol * scale {
        r.iter_mut().for_each(|x| *x /= rn);
        Some(r)
    } else {
        None
    }
}

/// Basis of the span of all words in the modes, identity included.
fn algebra_basis(modes: &ModeSet) -> Vec<Mat> {
    let d = modes.dim();
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    let mut words: Vec<Mat> = Vec::new();
    let mut queue = vec![Mat::identity(d)];
    while let Some(w) = queue.pop() {
        if let Some(q) = gram_schmidt(&ortho, w.as_slice(), SPAN_TOL) {
            ortho.push(q);
            let w = w.scale(1.0 / w.norm_fro());
            for a in modes.modes() {
                queue.push(a * &w);
            }
            words.push(w);
            if words.len() == d * d {
                break;
            }
        }
    }
    words
}

fn null_space(m: &Mat, tol: f64) -> Vec<Vec<f64>> {
    let svd = m.to_dmatrix().svd(false, true);
    let Some(v_t) = svd.v_t else {
        return Vec::new();
    };
    let scale = m.norm_2().max(1.0);
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= tol * scale)
        .map(|(i, _)| v_t.row(i).iter().copied().collect())
        .collect()
}

/// Smallest subspace containing `seed` and invariant under every mode.
fn invariant_closure(modes: &ModeSet, seed: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in seed {
        if let Some(q) = gram_schmidt(&basis, v, 1e-8) {
            basis.push(q);
        }
    }
    let mut i = 0;
    while i < basis.len() && basis.len() < modes.dim() {
        for a in modes.modes() {
            let av = a.matvec(&basis[i]);
            if let Some(q) = gram_schmidt(&basis, &av, 1e-8) {
                basis.push(q);
            }
        }
        i += 1;
    }
    basis
}

fn invariance_residual(modes: &ModeSet, basis: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for a in modes.modes() {
        for w in basis {
            let aw = a.matvec(w);
            let mut r = aw.clone();
            for b in basis {
                let c = dot(&aw, b);
                r.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
            worst = worst.max(norm(&r) / a.norm_2().max(1.0));
        }
    }
    worst
}

/// Candidate subspaces from real eigenspaces of `m`, then their individual
/// basis vectors.
fn eigen_candidates(m: &Mat) -> Vec<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    let Ok(eig) = eigenvalues(m) else {
        return out;
    };
    let scale = m.norm_2().max(1.0);
    let mut eig = eig;
    eig.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    for z in eig {
        let kernel = if z.im.abs() <= 1e-9 * scale {
            null_space(&m.shifted(-z.re), 1e-8)
        } else if z.im > 0.0 {
            let s = m.shifted(-z.re);
            null_space(&(&s * &s).shifted(z.im * z.im), 1e-8)
        } else {
            continue;
        };
        if kernel.is_empty() {
            continue;
        }
        if kernel.len() > 1 {
            out.extend(kernel.iter().map(|v| vec![v.clone()]));
        }
        out.push(kernel);
    }
    out
}

/// Burnside-style test: the modes are irreducible iff the algebra they
/// generate is all of `ℝ^{d×d}`.
///
/// Over the reals full dimension is sufficient but not necessary; when the
/// algebra is smaller and no real invariant subspace is found, the report
/// says reducible with no basis.
pub fn is_irreducible(modes: &ModeSet) -> IrreducibilityReport {
    let d = modes.dim();
    let words = algebra_basis(modes);
    let algebra_dim = words.len();
    if algebra_dim == d * d {
        return IrreducibilityReport {
            algebra_dim,
            is_irreducible: true,
            invariant_subspace_basis: None,
        };
    }
    let mut probes: Vec<Mat> = modes.modes().to_vec();
    probes.extend(words.iter().cloned());
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..20 {
        let mut m = Mat::zeros(d);
        for w in &words {
            m = &m + &w.scale(rng.gen_range(-1.0..1.0));
        }
        probes.push(m);
    }
    for m in &probes {
        for cand in eigen_candidates(m) {
            let closure = invariant_closure(modes, &cand);
            if !closure.is_empty()
                && closure.len() < d
                && invariance_residual(modes, &closure) <= INVARIANCE_TOL
            {
                return IrreducibilityReport {
                    algebra_dim,
                    is_irreducible: false,
                    invariant_subspace_basis: Some(closure),
                };
            }
        }
    }
    IrreducibilityReport {
        algebra_dim,
        is_irreducible: false,
        invariant_subspace_basis: None,
    }
}

/// Extends an orthonormal family to an orthonormal basis of `ℝ^d`.
pub fn complete_basis(first: &[Vec<f64>], d: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in first {
        if let Some(q) = gram_schmidt(&basis, v, 1e-8) {
            basis.push(q);
        }
    }
    for i in 0..d {
        if basis.len() == d {
            break;
        }
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        if let Some(q) = gram_schmidt(&basis, &e, 1e-8) {
            basis.push(q);
        }
    }
    basis
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockReduction {
    pub s11: ModeSet,
    /// Upper-right `d1 × d2` blocks, row-major, one per mode.
    pub s12: Vec<Vec<Vec<f64>>>,
    pub s22: ModeSet,
}

/// Blocks of every mode in the basis `columns`, whose first `d1` vectors
/// span a common invariant subspace.
pub fn block_reduce(modes: &ModeSet, columns: &[Vec<f64>], d1: usize) -> Result<BlockReduction> {
    let d = modes.dim();
    if columns.len() != d || columns.iter().any(|c| c.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: columns.len(),
        });
    }
    if d1 == 0 || d1 >= d {
        return Err(invalid(format!("d1 must lie in 1..{d}, got {d1}")));
    }
    let t = DMatrix::from_fn(d, d, |i, j| columns[j][i]);
    let t_inv = t
        .clone()
        .try_inverse()
        .ok_or_else(|| invalid("basis is singular"))?;
    let mut s11 = Vec::new();
    let mut s12 = Vec::new();
    let mut s22 = Vec::new();
    let mut worst: f64 = 0.0;
    for a in modes.modes() {
        let b = &t_inv * a.to_dmatrix() * &t;
        let scale = b.norm().max(1.0);
        for i in d1..d {
            for j in 0..d1 {
                worst = worst.max(b[(i, j)].abs() / scale);
            }
        }
        s11.push(Mat::from_dmatrix(&b.view((0, 0), (d1, d1)).into_owned()));
        s22.push(Mat::from_dmatrix(&b.view((d1, d1), (d - d1, d - d1)).into_owned()));
        s12.push(
            (0..d1)
                .map(|i| (d1..d).map(|j| b[(i, j)]).collect())
                .collect(),
        );
    }
    if worst > INVARIANCE_TOL {
        return Err(Error::NotInvariant(worst));
    }
    Ok(BlockReduction {
        s11: ModeSet::new(s11)?,
        s12,
        s22: ModeSet::new(s22)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockValues {
    pub d1: usize,
    pub lambda_11: f64,
    pub lambda_22: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub irreducibility: IrreducibilityReport,
    pub blocks: Option<BlockValues>,
    /// Block maximum when a reduction was found, otherwise the full value.
    pub value: f64,
    pub full_value: f64,
    pub warning: Option<String>,
}

/// Periodization estimate with block reduction when the modes share an
/// invariant subspace; the full-system value is always computed as a
/// cross-check.
pub fn lambda_reduced(modes: &ModeSet, tau: f64, search: &PeriodicSearch) -> Result<ReductionReport> {
    let irreducibility = is_irreducible(modes);
    let full_value = lambda_periodic(modes, tau, search)?.value;
    let mut warning = None;
    let mut blocks = None;
    if let Some(basis) = &irreducibility.invariant_subspace_basis {
        let d1 = basis.len();
        let columns = complete_basis(basis, modes.dim());
        let red = block_reduce(modes, &columns, d1)?;
        blocks = Some(BlockValues {
            d1,
            lambda_11: lambda_periodic(&red.s11, tau, search)?.value,
            lambda_22: lambda_periodic(&red.s22, tau, search)?.value,
        });
    } else if !irreducibility.is_irreducible {
        warning = Some("reducible but no real invariant subspace found; using the full system".into());
    }
    let value = blocks
        .as_ref()
        .map_or(full_value, |b| b.lambda_11.max(b.lambda_22));
    Ok(ReductionReport {
        irreducibility,
        blocks,
        value,
        full_value,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{monodromy, spectral_radius};
    use crate::signals::periodic_seam_valid;
    use proptest::prelude::*;

    fn diag_rot() -> ModeSet {
        ModeSet::new(vec![
            Mat::diag(&[1.0, -1.0]),
            Mat::from_array([[0.0, 1.0], [-1.0, 0.0]]),
        ])
        .unwrap()
    }

    fn quick() -> PeriodicSearch {
        PeriodicSearch {
            duration_samples: 8,
            refine_iters: 2,
            ..PeriodicSearch::default()
        }
    }

    #[test]
    fn cyclic_sequence_counts() {
        assert_eq!(cyclic_sequences(2, 1).len(), 2);
        assert_eq!(cyclic_sequences(2, 2), vec![vec![0, 1]]);
        assert!(cyclic_sequences(2, 3).is_empty());
        assert_eq!(cyclic_sequences(2, 4), vec![vec![0, 1, 0, 1]]);
        // proper 3-colourings of a 4-cycle: 2^4 + 2 = 18, in orbits of size 4 or 2
        let seqs = cyclic_sequences(3, 4);
        let orbit_total: usize = seqs
            .iter()
            .map(|s| if s[0] == s[2] && s[1] == s[3] { 2 } else { 4 })
            .sum();
        assert_eq!(orbit_total, 18);
    }

    #[test]
    fn single_mode_periodic_is_abscissa() {
        let a = Mat::from_array([[0.2, 1.0], [-0.7, -0.4]]);
        let modes = ModeSet::new(vec![a.clone()]).unwrap();
        let est = lambda_periodic(&modes, 0.5, &quick()).unwrap();
        assert!((est.value - spectral_abscissa(&a).unwrap()).abs() < 1e-12);
        let Witness::Periodic(p) = &est.witness else {
            panic!("periodic witness expected")
        };
        assert!(p.period_block.bangs().iter().all(|b| b.mode == 0));
    }

    #[test]
    fn periodic_witness_recomputes() {
        let est = lambda_periodic(&diag_rot(), 0.3, &quick()).unwrap();
        let Witness::Periodic(p) = &est.witness else {
            panic!("periodic witness expected")
        };
        assert!(periodic_seam_valid(p));
        let phi = monodromy(&p.period_block, &diag_rot()).unwrap();
        let direct = spectral_radius(&phi).unwrap().ln() / p.period();
        assert!((direct - est.value).abs() < 1e-12);
        if let Some(x0) = &p.x0 {
            let image = ProjPoint::new(phi.matvec(x0.as_slice())).unwrap();
            assert!(crate::projective::proj_distance(&image, x0) < 1e-8);
        }
    }

    #[test]
    fn diag_rot_rate_is_one() {
        // constant diag(1,-1) gives 1 and ⟨s, A s⟩ ≤ 1 for both modes
        for tau in [0.0, 0.1, 1.0] {
            let est = lambda_periodic(&diag_rot(), tau, &quick()).unwrap();
            assert!((est.value - 1.0).abs() < 1e-12, "tau {tau}: {}", est.value);
        }
    }

    #[test]
    fn brute_force_two_bang_oracle() {
        // exhaustive fine grid over two-bang blocks on a non-normal pair
        let modes = ModeSet::new(vec![
            Mat::from_array([[-0.1, 1.0], [-2.0, -0.1]]),
            Mat::from_array([[-0.1, 2.0], [-1.0, -0.1]]),
        ])
        .unwrap();
        let tau = 0.5;
        let mut oracle = f64::NEG_INFINITY;
        for i in 0..200 {
            for j in 0..200 {
                let s = tau + 0.01 * i as f64;
                let t = tau + 0.01 * j as f64;
                let phi = &expm_unchecked(&modes.modes()[1], t) * &expm_unchecked(&modes.modes()[0], s);
                oracle = oracle.max(spectral_radius(&phi).unwrap().ln() / (s + t));
            }
        }
        let est = lambda_periodic(
            &modes,
            tau,
            &PeriodicSearch {
                max_bangs: 2,
                ..PeriodicSearch::default()
            },
        )
        .unwrap();
        assert!(oracle > 0.0, "switching destabilizes: {oracle}");
        assert!(est.value >= oracle - 1e-4, "{} vs {oracle}", est.value);
    }

    #[test]
    fn periodic_monotone_in_tau() {
        let modes = ModeSet::new(vec![
            Mat::from_array([[-0.1, 1.0], [-2.0, -0.1]]),
            Mat::from_array([[-0.1, 2.0], [-1.0, -0.1]]),
        ])
        .unwrap();
        let search = PeriodicSearch {
            t_max: Some(20.0),
            duration_grid: Some(duration_grid(0.0, 20.0, 16)),
            ..quick()
        };
        let taus = [0.0, 0.25, 0.5, 1.0, 2.0];
        let vals: Vec<f64> = lambda_periodic_sweep(&modes, &taus, &search)
            .unwrap()
            .iter()
            .map(|e| e.value)
            .collect();
        for w in vals.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "{vals:?}");
        }
    }

    #[test]
    fn random_zero_matrix_is_zero() {
        let modes = ModeSet::new(vec![Mat::zeros(2)]).unwrap();
        let est = lambda_random(&modes, 1.0, 10, 30.0, 1).unwrap();
        assert_eq!(est.value, 0.0);
        assert!(lambda_random(&modes, 1.0, 10, 5.0, 1).is_err());
    }

    #[test]
    fn random_single_mode_close_to_abscissa() {
        let a = Mat::from_array([[0.3, 1.2], [-0.8, -0.5]]);
        let modes = ModeSet::new(vec![a.clone()]).unwrap();
        let est = lambda_random(&modes, 0.5, 5, 200.0, 3).unwrap();
        assert!((est.value - spectral_abscissa(&a).unwrap()).abs() < 0.02);
    }

    #[test]
    fn random_witness_and_workers() {
        let search = RandomSearch {
            n_signals: 64,
            horizon: 40.0,
            seed: 11,
            ..RandomSearch::default()
        };
        let one = lambda_random_with(&diag_rot(), 0.5, &search).unwrap();
        let four = lambda_random_with(&diag_rot(), 0.5, &RandomSearch { workers: 4, ..search.clone() }).unwrap();
        assert_eq!(one, four);
        let Witness::Signal(sig) = &one.witness else {
            panic!("signal witness expected")
        };
        assert!(sig.is_valid());
        assert!((sig.total_duration() - 40.0).abs() < 1e-9);
        assert_eq!(signal_growth_rate(sig, &diag_rot()).unwrap(), one.value);
        assert!(one.value <= 1.0 + 1e-12);
    }

    #[test]
    fn irreducibility_examples() {
        let r = is_irreducible(&diag_rot());
        assert!(r.is_irreducible);
        assert_eq!(r.algebra_dim, 4);

        let tri = ModeSet::new(vec![Mat::from_array([[1.0, 1.0], [0.0, 2.0]])]).unwrap();
        let r = is_irreducible(&tri);
        assert!(!r.is_irreducible);
        let basis = r.invariant_subspace_basis.unwrap();
        assert_eq!(basis.len(), 1);
        assert!(basis[0][1].abs() < 1e-12 && (basis[0][0].abs() - 1.0).abs() < 1e-12);

        let id = ModeSet::new(vec![Mat::identity(3)]).unwrap();
        let r = is_irreducible(&id);
        assert_eq!(r.algebra_dim, 1);
        assert_eq!(r.invariant_subspace_basis.unwrap().len(), 1);

        // commutative rotation algebra: no real invariant line
        let rot = ModeSet::new(vec![Mat::from_array([[0.0, 1.0], [-1.0, 0.0]])]).unwrap();
        let r = is_irreducible(&rot);
        assert_eq!(r.algebra_dim, 2);
        assert!(r.invariant_subspace_basis.is_none());
    }

    #[test]
    fn complex_invariant_plane_in_3d() {
        let r = Mat::from_rows(&[
            vec![1.0, 0.2, 0.0],
            vec![0.1, 1.0, 0.3],
            vec![0.0, -0.2, 1.0],
        ])
        .unwrap();
        let raw = ModeSet::new(vec![
            Mat::from_rows(&[vec![0.0, 1.0, 0.5], vec![-1.0, 0.0, 0.2], vec![0.0, 0.0, 2.0]]).unwrap(),
            Mat::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, -1.0], vec![0.0, 0.0, 0.5]]).unwrap(),
        ])
        .unwrap();
        let modes = raw.conjugated_by(&r).unwrap();
        let rep = is_irreducible(&modes);
        assert!(!rep.is_irreducible);
        let basis = rep.invariant_subspace_basis.unwrap();
        assert_eq!(basis.len(), 2);
        assert!(invariance_residual(&modes, &basis) < 1e-10);
        let red = block_reduce(&modes, &complete_basis(&basis, 3), 2).unwrap();
        assert_eq!(red.s11.dim(), 2);
        assert_eq!(red.s22.dim(), 1);
    }

    #[test]
    fn block_reduce_examples() {
        let tri = ModeSet::new(vec![Mat::from_array([[1.0, 1.0], [0.0, 2.0]])]).unwrap();
        let e = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let red = block_reduce(&tri, &e, 1).unwrap();
        assert_eq!(red.s11.modes()[0], Mat::from_array([[1.0]]));
        assert_eq!(red.s22.modes()[0], Mat::from_array([[2.0]]));
        assert_eq!(red.s12, vec![vec![vec![1.0]]]);

        let r = Mat::from_array([[2.0, 1.0], [0.5, 1.0]]);
        let conj = tri.conjugated_by(&r).unwrap();
        let cols = vec![r.matvec(&[1.0, 0.0]), r.matvec(&[0.0, 1.0])];
        let red2 = block_reduce(&conj, &cols, 1).unwrap();
        assert!(red2.s11.modes()[0].max_abs_diff(&Mat::from_array([[1.0]])) < 1e-10);
        assert!(red2.s22.modes()[0].max_abs_diff(&Mat::from_array([[2.0]])) < 1e-10);

        let swapped = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert!(matches!(block_reduce(&tri, &swapped, 1), Err(Error::NotInvariant(_))));
    }

    #[test]
    fn reduction_pipeline_agrees() {
        let modes = ModeSet::new(vec![
            Mat::from_array([[0.5, 1.0], [0.0, -0.3]]),
            Mat::from_array([[-0.2, 2.0], [0.0, 0.1]]),
        ])
        .unwrap();
        let rep = lambda_reduced(&modes, 0.5, &quick()).unwrap();
        let blocks = rep.blocks.clone().unwrap();
        assert!((blocks.lambda_11 - 0.5).abs() < 1e-12);
        assert!((blocks.lambda_22 - 0.1).abs() < 1e-12);
        assert!((rep.value - rep.full_value).abs() < 1e-9);
    }

    fn small_mat() -> impl Strategy<Value = Mat> {
        proptest::array::uniform4(-1.0f64..1.0).prop_map(|v| Mat::from_array([[v[0], v[1]], [v[2], v[3]]]))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn periodic_shift_covariance(a in small_mat(), b in small_mat(), c in -1.0f64..1.0) {
            let modes = ModeSet::new(vec![a, b]).unwrap();
            let search = PeriodicSearch { duration_samples: 5, ..PeriodicSearch::default() };
            let base = lambda_periodic(&modes, 0.4, &search).unwrap().value;
            let shifted = lambda_periodic(&modes.shifted(c), 0.4, &search).unwrap().value;
            prop_assert!((shifted - base - c).abs() < 1e-10, "{} {} {}", base, shifted, c);
        }

        #[test]
        fn random_shift_covariance(a in small_mat(), b in small_mat(), c in -1.0f64..1.0) {
            let modes = ModeSet::new(vec![a, b]).unwrap();
            let search = RandomSearch { n_signals: 8, horizon: 20.0, seed: 5, hill_climb_sweeps: 20, workers: 1 };
            let base = lambda_random_with(&modes, 0.5, &search).unwrap().value;
            let shifted = lambda_random_with(&modes.shifted(c), 0.5, &search).unwrap().value;
            prop_assert!((shifted - base - c).abs() < 1e-10);
        }

        #[test]
        fn irreducibility_conjugation_invariant(a in small_mat(), b in small_mat(),
                                                r in proptest::array::uniform4(-1.0f64..1.0)) {
            let rm = &Mat::from_array([[r[0], r[1]], [r[2], r[3]]]) + &Mat::identity(2).scale(3.0);
            let modes = ModeSet::new(vec![a, b]).unwrap();
            let conj = modes.conjugated_by(&rm).unwrap();
            prop_assert_eq!(is_irreducible(&modes).is_irreducible, is_irreducible(&conj).is_irreducible);
        }
    }
}
