//! Dense real matrices, the matrix exponential, spectra and monodromy
//! matrices of piecewise-constant signals.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signals::DwellSignal;

/// A square `dim × dim` real matrix stored row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Mat {
    dim: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

impl Mat {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidMatrix("dimension must be at least 1".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries, got {}",
                dim * dim,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidMatrix(format!("non-finite entry {bad}")));
        }
        Ok(Mat { dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::InvalidMatrix(format!(
                "row of length {} in a {dim}-row matrix",
                r.len()
            )));
        }
        Mat::new(dim, rows.concat())
    }

    /// Convenience for literals in tests and examples; panics on bad input.
    pub fn from_array<const N: usize>(rows: [[f64; N]; N]) -> Self {
        Mat::new(N, rows.iter().flatten().copied().collect()).expect("valid literal matrix")
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Mat::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Mat {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Mat::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m.data[i * values.len() + i] = *v;
        }
        m
    }

    /// Counterclockwise rotation of the plane by `angle`.
    pub fn rotation(angle: f64) -> Self {
        let (s, c) = snapped_sin_cos(angle);
        Mat::from_array([[c, -s], [s, c]])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn transpose(&self) -> Mat {
        let n = self.dim;
        let mut out = Mat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j];
            }
        }
        out
    }

    pub fn scale(&self, c: f64) -> Mat {
        Mat {
            dim: self.dim,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }

    /// `A + c·Id`.
    pub fn shifted(&self, c: f64) -> Mat {
        let mut out = self.clone();
        for i in 0..self.dim {
            out.data[i * self.dim + i] += c;
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.dim);
        self.data
            .chunks(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        let big = self.data.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if big == 0.0 || !big.is_finite() {
            return big;
        }
        big * self.data.iter().map(|x| (x / big).powi(2)).sum::<f64>().sqrt()
    }

    /// Operator 2-norm (largest singular value).
    pub fn norm_2(&self) -> f64 {
        self.to_dmatrix()
            .singular_values()
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }

    pub fn det(&self) -> f64 {
        self.to_dmatrix().determinant()
    }

    pub fn inverse(&self) -> Option<Mat> {
        self.to_dmatrix()
            .try_inverse()
            .map(|m| Mat::from_dmatrix(&m))
    }

    /// `R · self · R⁻¹`, or `None` when `r` is singular.
    pub fn conjugated_by(&self, r: &Mat) -> Option<Mat> {
        let r_inv = r.inverse()?;
        Some(&(r * self) * &r_inv)
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    pub fn from_dmatrix(m: &DMatrix<f64>) -> Mat {
        assert!(m.is_square(), "expected a square matrix");
        let n = m.nrows();
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(m[(i, j)]);
            }
        }
        Mat { dim: n, data }
    }

    pub fn max_abs_diff(&self, other: &Mat) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

impl TryFrom<Vec<Vec<f64>>> for Mat {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Mat::from_rows(&rows)
    }
}

impl From<Mat> for Vec<Vec<f64>> {
    fn from(m: Mat) -> Self {
        m.rows()
    }
}

impl Mul for &Mat {
    type Output = Mat;
    fn mul(self, rhs: &Mat) -> Mat {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        Mat { dim: n, data: out }
    }
}

impl Add for &Mat {
    type Output = Mat;
    fn add(self, rhs: &Mat) -> Mat {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        Mat {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Mat {
    type Output = Mat;
    fn sub(self, rhs: &Mat) -> Mat {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        Mat {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Finite, nonempty family of modes sharing one dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSet {
    modes: Vec<Mat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl ModeSet {
    pub fn new(modes: Vec<Mat>) -> Result<Self> {
        let first = modes.first().ok_or(Error::EmptySet)?;
        let dim = first.dim();
        if let Some(m) = modes.iter().find(|m| m.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: m.dim(),
            });
        }
        Ok(ModeSet {
            modes,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.modes.len() {
            return Err(Error::InvalidParameter(format!(
                "{} labels for {} modes",
                labels.len(),
                self.modes.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Checks the invariants after deserialization.
    pub fn validated(self) -> Result<Self> {
        let labels = self.labels;
        let set = ModeSet::new(self.modes)?;
        match labels {
            Some(l) => set.with_labels(l),
            None => Ok(set),
        }
    }

    pub fn dim(&self) -> usize {
        self.modes[0].dim()
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Mat] {
        &self.modes
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn get(&self, index: usize) -> Result<&Mat> {
        self.modes.get(index).ok_or(Error::ModeIndex {
            index,
            count: self.modes.len(),
        })
    }

    /// Every mode replaced by `A + c·Id`.
    pub fn shifted(&self, c: f64) -> ModeSet {
        ModeSet {
            modes: self.modes.iter().map(|m| m.shifted(c)).collect(),
            labels: self.labels.clone(),
        }
    }

    /// Every mode replaced by `R A R⁻¹`.
    pub fn conjugated_by(&self, r: &Mat) -> Option<ModeSet> {
        let modes = self
            .modes
            .iter()
            .map(|m| m.conjugated_by(r))
            .collect::<Option<Vec<_>>>()?;
        Some(ModeSet {
            modes,
            labels: self.labels.clone(),
        })
    }
}

const EXPM_SCALE_THRESHOLD: f64 = 0.5;
// 0.5^19 / 19! < 1e-22, well below double precision.
const EXPM_TAYLOR_ORDER: usize = 18;

/// `e^{tA}` by scaling and squaring with a Taylor kernel on `‖tA/2^s‖₁ ≤ 0.5`.
pub fn expm(a: &Mat, t: f64) -> Result<Mat> {
    if !t.is_finite() {
        return Err(Error::InvalidParameter(format!("non-finite time {t}")));
    }
    if !a.is_finite() {
        return Err(Error::InvalidMatrix("non-finite entry".into()));
    }
    Ok(expm_unchecked(a, t))
}

pub(crate) fn expm_unchecked(a: &Mat, t: f64) -> Mat {
    let n = a.dim();
    if t == 0.0 {
        return Mat::identity(n);
    }
    let x = a.scale(t);
    let norm = x.norm_1();
    let squarings = if norm > EXPM_SCALE_THRESHOLD {
        (norm / EXPM_SCALE_THRESHOLD).log2().ceil() as i32
    } else {
        0
    };
    let x = x.scale(0.5f64.powi(squarings));

    // Horner form of the truncated Taylor series.
    let mut acc = Mat::identity(n);
    for k in (1..=EXPM_TAYLOR_ORDER).rev() {
        acc = &(&x * &acc).scale(1.0 / k as f64) + &Mat::identity(n);
    }
    for _ in 0..squarings {
        acc = &acc * &acc;
    }
    acc
}

/// Eigenvalues, unordered. Closed form for `d ≤ 2`, real Schur (shifted QR)
/// otherwise.
pub fn eigenvalues(a: &Mat) -> Result<Vec<Complex<f64>>> {
    match a.dim() {
        1 => Ok(vec![Complex::new(a.get(0, 0), 0.0)]),
        2 => Ok(eigenvalues_2x2(a).to_vec()),
        d => {
            let schur = nalgebra::linalg::Schur::try_new(a.to_dmatrix(), 1e-12, 100 * d * d)
                .ok_or(Error::NoConvergence)?;
            Ok(schur.complex_eigenvalues().iter().copied().collect())
        }
    }
}

fn eigenvalues_2x2(a: &Mat) -> [Complex<f64>; 2] {
    let (p, q, r, s) = (a.get(0, 0), a.get(0, 1), a.get(1, 0), a.get(1, 1));
    let half_tr = 0.5 * (p + s);
    // discriminant (tr/2)² − det written to avoid cancellation
    let half_diff = 0.5 * (p - s);
    let disc = half_diff * half_diff + q * r;
    if disc >= 0.0 {
        let root = disc.sqrt();
        // stable quadratic: the larger-magnitude root first, the other via det
        let big = if half_tr >= 0.0 {
            half_tr + root
        } else {
            half_tr - root
        };
        let det = p * s - q * r;
        let small = if big != 0.0 { det / big } else { half_tr - root };
        [Complex::new(big, 0.0), Complex::new(small, 0.0)]
    } else {
        let im = (-disc).sqrt();
        [Complex::new(half_tr, im), Complex::new(half_tr, -im)]
    }
}

pub fn spectral_radius(a: &Mat) -> Result<f64> {
    Ok(eigenvalues(a)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

pub fn spectral_abscissa(a: &Mat) -> Result<f64> {
    Ok(eigenvalues(a)?
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Fundamental matrix `e^{t_m A_{i_m}} ⋯ e^{t_1 A_{i_1}}` of a signal.
pub fn monodromy(sig: &DwellSignal, modes: &ModeSet) -> Result<Mat> {
    let mut phi = Mat::identity(modes.dim());
    for bang in sig.bangs() {
        let a = modes.get(bang.mode)?;
        phi = &expm_unchecked(a, bang.duration) * &phi;
    }
    Ok(phi)
}

/// A matrix kept as `e^{log_scale} · unit` with `1 ≤ ‖unit‖_F < 2`, for long
/// products whose entries would overflow.
#[derive(Clone, Debug)]
pub struct LogScaled {
    pub unit: Mat,
    pub log_scale: f64,
}

impl LogScaled {
    pub fn identity(dim: usize) -> Self {
        LogScaled::from_mat(Mat::identity(dim))
    }

    /// Scales by a power of two so that the normalization is exact.
    pub fn from_mat(m: Mat) -> Self {
        let n = m.norm_fro();
        let k = n.log2().floor() as i32;
        LogScaled {
            unit: m.scale(2f64.powi(-k)),
            log_scale: k as f64 * std::f64::consts::LN_2,
        }
    }

    /// `lhs · self`.
    pub fn premul(&self, lhs: &Mat) -> LogScaled {
        let mut out = LogScaled::from_mat(lhs * &self.unit);
        out.log_scale += self.log_scale;
        out
    }

    /// `self · rhs`.
    pub fn postmul(&self, rhs: &LogScaled) -> LogScaled {
        let mut out = LogScaled::from_mat(&self.unit * &rhs.unit);
        out.log_scale += self.log_scale + rhs.log_scale;
        out
    }

    /// `log‖M e_j‖` for every column `j`.
    pub fn log_column_norms(&self) -> Vec<f64> {
        let n = self.unit.dim();
        (0..n)
            .map(|j| {
                let norm = (0..n)
                    .map(|i| self.unit.get(i, j).powi(2))
                    .sum::<f64>()
                    .sqrt();
                norm.ln() + self.log_scale
            })
            .collect()
    }

    pub fn log_spectral_radius(&self) -> Result<f64> {
        Ok(spectral_radius(&self.unit)?.ln() + self.log_scale)
    }
}

/// `sin_cos` with roundoff-sized components set to exact zero, so that
/// multiples of π/2 give axis-aligned results.
pub(crate) fn snapped_sin_cos(angle: f64) -> (f64, f64) {
    let (s, c) = angle.sin_cos();
    let snap = |x: f64| if x.abs() < 1e-15 { 0.0 } else { x };
    (snap(s), snap(c))
}
