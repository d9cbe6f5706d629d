//! Piecewise-constant switching signals with a dwell-time constraint.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::projective::ProjPoint;

/// One maximal constant piece of a signal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "(usize, f64)", into = "(usize, f64)")]
pub struct Bang {
    pub mode: usize,
    pub duration: f64,
}

impl Bang {
    pub fn new(mode: usize, duration: f64) -> Self {
        Bang { mode, duration }
    }
}

impl From<(usize, f64)> for Bang {
    fn from((mode, duration): (usize, f64)) -> Self {
        Bang { mode, duration }
    }
}

impl From<Bang> for (usize, f64) {
    fn from(b: Bang) -> Self {
        (b.mode, b.duration)
    }
}

/// A finite switching signal together with the dwell-time `tau` it is
/// meant to certify. Construction only checks that durations are finite and
/// positive; [`DwellSignal::validate`] checks the dwell-time constraint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DwellSignal {
    tau: f64,
    bangs: Vec<Bang>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Validation {
    pub valid: bool,
    /// Indices (into the unmerged bang list) of bangs belonging to a merged
    /// run shorter than `tau`.
    pub offenders: Vec<usize>,
}

impl DwellSignal {
    pub fn new(tau: f64, bangs: Vec<Bang>) -> Result<Self> {
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(invalid(format!("dwell-time must be finite and >= 0, got {tau}")));
        }
        if let Some(b) = bangs
            .iter()
            .find(|b| !(b.duration.is_finite() && b.duration > 0.0))
        {
            return Err(invalid(format!(
                "bang durations must be finite and > 0, got {}",
                b.duration
            )));
        }
        Ok(DwellSignal { tau, bangs })
    }

    pub fn empty(tau: f64) -> Result<Self> {
        DwellSignal::new(tau, Vec::new())
    }

    /// Re-checks construction invariants after deserialization.
    pub fn checked(self) -> Result<Self> {
        DwellSignal::new(self.tau, self.bangs)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn bangs(&self) -> &[Bang] {
        &self.bangs
    }

    pub fn is_empty(&self) -> bool {
        self.bangs.is_empty()
    }

    pub fn total_duration(&self) -> f64 {
        self.bangs.iter().map(|b| b.duration).sum()
    }

    pub fn max_mode(&self) -> Option<usize> {
        self.bangs.iter().map(|b| b.mode).max()
    }

    /// Same signal with adjacent equal-mode bangs merged.
    pub fn merged(&self) -> DwellSignal {
        DwellSignal {
            tau: self.tau,
            bangs: merge_runs(&self.bangs).into_iter().map(|(b, _)| b).collect(),
        }
    }

    pub fn validate(&self) -> Validation {
        let mut offenders = Vec::new();
        for (bang, range) in merge_runs(&self.bangs) {
            if bang.duration < self.tau {
                offenders.extend(range);
            }
        }
        Validation {
            valid: offenders.is_empty(),
            offenders,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.validate().valid
    }

    /// Times of the discontinuities of the (merged) signal.
    pub fn switch_times(&self) -> Vec<f64> {
        let merged = self.merged();
        let mut t = 0.0;
        let mut out = Vec::new();
        for (i, b) in merged.bangs.iter().enumerate() {
            t += b.duration;
            if i + 1 < merged.bangs.len() {
                out.push(t);
            }
        }
        out
    }

    /// `self * other`: bangs of `self` then `other`, merging at the junction.
    pub fn concat(&self, other: &DwellSignal) -> Result<DwellSignal> {
        if self.tau != other.tau {
            return Err(Error::TauMismatch(self.tau, other.tau));
        }
        let mut bangs = self.merged().bangs;
        for b in other.merged().bangs {
            match bangs.last_mut() {
                Some(last) if last.mode == b.mode => last.duration += b.duration,
                _ => bangs.push(b),
            }
        }
        Ok(DwellSignal {
            tau: self.tau,
            bangs,
        })
    }

    /// Replaces the duration of bang `index`.
    pub fn with_duration(&self, index: usize, duration: f64) -> Result<DwellSignal> {
        let mut bangs = self.bangs.clone();
        let b = bangs
            .get_mut(index)
            .ok_or_else(|| invalid(format!("bang index {index} out of range")))?;
        b.duration = duration;
        DwellSignal::new(self.tau, bangs)
    }
}

fn merge_runs(bangs: &[Bang]) -> Vec<(Bang, std::ops::Range<usize>)> {
    let mut out: Vec<(Bang, std::ops::Range<usize>)> = Vec::new();
    for (i, b) in bangs.iter().enumerate() {
        match out.last_mut() {
            Some((last, range)) if last.mode == b.mode => {
                last.duration += b.duration;
                range.end = i + 1;
            }
            _ => out.push((*b, i..i + 1)),
        }
    }
    out
}

/// Random dwell-time signal of total duration exactly `horizon`.
///
/// Durations are `tau + Exp(mean = max_extra)`; the last bang absorbs the
/// remainder so that it stays `>= tau`. Successive modes differ.
pub fn sample_random(
    tau: f64,
    n_modes: usize,
    horizon: f64,
    seed: u64,
    max_extra: f64,
) -> Result<DwellSignal> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_random_with(&mut rng, tau, n_modes, horizon, max_extra)
}

pub fn sample_random_with<R: Rng + ?Sized>(
    rng: &mut R,
    tau: f64,
    n_modes: usize,
    horizon: f64,
    max_extra: f64,
) -> Result<DwellSignal> {
    if n_modes == 0 {
        return Err(Error::EmptySet);
    }
    if !(horizon.is_finite() && horizon > 0.0 && horizon >= tau) {
        return Err(invalid(format!(
            "horizon {horizon} must be positive and at least tau = {tau}"
        )));
    }
    if !(max_extra.is_finite() && max_extra > 0.0) {
        return Err(invalid(format!("max_extra must be > 0, got {max_extra}")));
    }
    if n_modes == 1 {
        return DwellSignal::new(tau, vec![Bang::new(0, horizon)]);
    }
    let mut bangs = Vec::new();
    let mut remaining = horizon;
    let mut mode = rng.gen_range(0..n_modes);
    loop {
        let u: f64 = rng.gen();
        let d = tau - max_extra * (1.0 - u).ln();
        if remaining - d < tau.max(f64::MIN_POSITIVE) || d >= remaining {
            bangs.push(Bang::new(mode, remaining));
            break;
        }
        bangs.push(Bang::new(mode, d));
        remaining -= d;
        let step = rng.gen_range(1..n_modes);
        mode = (mode + step) % n_modes;
    }
    DwellSignal::new(tau, bangs)
}

/// A block whose infinite repetition is the signal, with an optional
/// projective witness point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicSignal {
    pub period_block: DwellSignal,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<ProjPoint>,
}

impl PeriodicSignal {
    pub fn new(period_block: DwellSignal, x0: Option<ProjPoint>) -> Result<Self> {
        if !(period_block.total_duration() > 0.0) {
            return Err(invalid("period must be positive"));
        }
        Ok(PeriodicSignal { period_block, x0 })
    }

    pub fn period(&self) -> f64 {
        self.period_block.total_duration()
    }
}

/// Whether the periodic extension of a block satisfies the dwell-time
/// constraint. Equal first and last modes merge at the seam into a bang of
/// length `>= 2 tau`; different ones keep their own durations, so any block
/// that validates passes.
pub fn periodic_seam_valid(p: &PeriodicSignal) -> bool {
    let block = p.period_block.merged();
    if !block.is_valid() {
        return false;
    }
    match (block.bangs.first(), block.bangs.last()) {
        (Some(first), Some(last)) if block.bangs.len() > 1 && first.mode == last.mode => {
            first.duration + last.duration >= block.tau
        }
        (Some(_), Some(_)) => true,
        _ => false,
    }
}
