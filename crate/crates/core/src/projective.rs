//! Points and projected linear flows on the projective space RP^{d-1}.
//!
//! A point is a unit vector up to sign. The flow of a mode `A` is
//! `s ↦ π(e^{tA} s)`, which solves `ṡ = (A − ⟨s, A s⟩ Id) s`. On RP^1 points
//! are charted by an angle `θ ∈ [0, π)` through `(cos θ, sin θ)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::matrix::{expm_unchecked, Mat, ModeSet};
use crate::signals::DwellSignal;

const CANONICAL_ZERO_TOL: f64 = 1e-14;
/// Bangs with `‖tA‖₁` above this are split before exponentiating.
pub const SUBSTEP_NORM: f64 = 50.0;

/// Unit vector with the first coordinate of magnitude above `1e-14` positive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProjPoint {
    v: Vec<f64>,
}

impl ProjPoint {
    pub fn new(v: Vec<f64>) -> Result<Self> {
        if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
            return Err(invalid("projective point needs finite coordinates"));
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(invalid("zero vector has no projective class"));
        }
        Ok(ProjPoint::from_unnormalized(v, norm))
    }

    fn from_unnormalized(mut v: Vec<f64>, norm: f64) -> Self {
        let sign = v
            .iter()
            .find(|x| x.abs() > CANONICAL_ZERO_TOL * norm)
            .map_or(1.0, |x| x.signum());
        let k = sign / norm;
        v.iter_mut().for_each(|x| *x *= k);
        ProjPoint { v }
    }

    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        ProjPoint::from_unnormalized(vec![c, s], 1.0)
    }

    /// Standard basis vector `e_i` of ℝ^dim.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        ProjPoint { v }
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.v
    }

    /// Chart coordinate on RP^1; `None` unless `dim == 2`.
    pub fn angle(&self) -> Option<Angle> {
        (self.v.len() == 2).then(|| Angle::new(self.v[1].atan2(self.v[0])))
    }
}

impl TryFrom<Vec<f64>> for ProjPoint {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        ProjPoint::new(v)
    }
}

impl From<ProjPoint> for Vec<f64> {
    fn from(p: ProjPoint) -> Self {
        p.v
    }
}

/// Angle on RP^1, reduced to `[0, π)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Angle(f64);

impl Angle {
    pub fn new(theta: f64) -> Self {
        let mut t = theta.rem_euclid(PI);
        if t >= PI {
            t = 0.0;
        }
        Angle(t)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn point(self) -> ProjPoint {
        ProjPoint::from_angle(self.0)
    }

    /// Signed shortest difference `self − other`, in `(−π/2, π/2]`.
    pub fn diff(self, other: Angle) -> f64 {
        wrap_half(self.0 - other.0)
    }
}

/// Reduces an angle difference to `(−π/2, π/2]`.
pub fn wrap_half(x: f64) -> f64 {
    let mut d = x.rem_euclid(PI);
    if d > PI / 2.0 {
        d -= PI;
    }
    d
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Flows the unit vector `v` along `A` for time `t`, returning the log of the
/// norm growth and the new unit vector (not canonicalized).
pub(crate) fn bang_growth(a: &Mat, t: f64, v: &[f64]) -> (f64, Vec<f64>) {
    let size = a.norm_1() * t.abs();
    let pieces = if size > SUBSTEP_NORM {
        (size / SUBSTEP_NORM).ceil() as usize
    } else {
        1
    };
    let step = expm_unchecked(a, t / pieces as f64);
    let mut x = v.to_vec();
    let mut log_growth = 0.0;
    for _ in 0..pieces {
        x = step.matvec(&x);
        let n = norm(&x);
        log_growth += n.ln();
        x.iter_mut().for_each(|c| *c /= n);
    }
    (log_growth, x)
}

/// `π(e^{tA} s)`.
pub fn proj_flow(a: &Mat, t: f64, s: &ProjPoint) -> Result<ProjPoint> {
    check_dim(a.dim(), s.dim())?;
    if !t.is_finite() {
        return Err(invalid(format!("non-finite time {t}")));
    }
    let (_, v) = bang_growth(a, t, &s.v);
    Ok(ProjPoint::from_unnormalized(v, 1.0))
}

/// Tangent vector `h(A, s) s = A s − ⟨s, A s⟩ s` of the projected field.
pub fn angular_velocity(a: &Mat, s: &ProjPoint) -> Result<Vec<f64>> {
    check_dim(a.dim(), s.dim())?;
    let av = a.matvec(&s.v);
    let radial = dot(&s.v, &av);
    Ok(av.iter().zip(&s.v).map(|(x, y)| x - radial * y).collect())
}

/// Scalar angular speed `(s^⊥)ᵀ A s` on RP^1, with `s^⊥ = (−s₂, s₁)`.
pub fn angular_speed(a: &Mat, s: &ProjPoint) -> Result<f64> {
    if a.dim() != 2 || s.dim() != 2 {
        return Err(invalid("angular speed is defined on RP^1 only"));
    }
    let av = a.matvec(&s.v);
    Ok(-s.v[1] * av[0] + s.v[0] * av[1])
}

/// `(log‖Φ(T,0) x0‖, π(Φ(T,0) x0))` accumulated bang by bang with
/// renormalization.
pub fn radial_log_growth(
    sig: &DwellSignal,
    modes: &ModeSet,
    x0: &ProjPoint,
) -> Result<(f64, ProjPoint)> {
    check_dim(modes.dim(), x0.dim())?;
    let mut v = x0.v.clone();
    let mut total = 0.0;
    for bang in sig.bangs() {
        let a = modes.get(bang.mode)?;
        let (g, next) = bang_growth(a, bang.duration, &v);
        total += g;
        v = next;
    }
    Ok((total, ProjPoint::from_unnormalized(v, 1.0)))
}

/// Angle between the lines, in `[0, π/2]`.
pub fn proj_distance(s1: &ProjPoint, s2: &ProjPoint) -> f64 {
    let c = dot(&s1.v, &s2.v);
    let residual: Vec<f64> = s2.v.iter().zip(&s1.v).map(|(y, x)| y - c * x).collect();
    norm(&residual).atan2(c.abs())
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Closed-form projected flow of a 2×2 mode.
///
/// With `B = A − (tr A / 2) Id` and `δ² = −det B`, `e^{tA}` is a positive
/// multiple of `c(t) Id + s(t) B`, where the pair is scaled so that it stays
/// bounded for all `t`. Only the direction is meaningful.
#[derive(Clone, Debug)]
pub struct PlanarFlow {
    b: Mat,
    delta_sq: f64,
    a: Mat,
}

impl PlanarFlow {
    pub fn new(a: &Mat) -> Result<Self> {
        if a.dim() != 2 {
            return Err(invalid("planar flow needs a 2x2 mode"));
        }
        let b = a.shifted(-0.5 * a.trace());
        let delta_sq = -b.det();
        Ok(PlanarFlow {
            b,
            delta_sq,
            a: a.clone(),
        })
    }

    fn coefficients(&self, t: f64) -> (f64, f64) {
        let x2 = self.delta_sq * t * t;
        if x2.abs() < 1e-6 {
            (1.0, t * (1.0 - x2 / 3.0 + 2.0 * x2 * x2 / 15.0))
        } else if self.delta_sq > 0.0 {
            let d = self.delta_sq.sqrt();
            (1.0, (t * d).tanh() / d)
        } else {
            let w = (-self.delta_sq).sqrt();
            ((t * w).cos(), (t * w).sin() / w)
        }
    }

    /// Unit vector along `e^{tA} v`.
    pub fn direction(&self, t: f64, v: &[f64]) -> [f64; 2] {
        let (c, s) = self.coefficients(t);
        let bv = self.b.matvec(v);
        let x = [c * v[0] + s * bv[0], c * v[1] + s * bv[1]];
        let n = (x[0] * x[0] + x[1] * x[1]).sqrt();
        [x[0] / n, x[1] / n]
    }

    /// Radial rate `⟨θ(t), A θ(t)⟩` along the projected orbit of `v`.
    pub fn radial_rate(&self, t: f64, v: &[f64]) -> f64 {
        let u = self.direction(t, v);
        let au = self.a.matvec(&u);
        u[0] * au[0] + u[1] * au[1]
    }
}
