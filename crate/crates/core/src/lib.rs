//! Dwell-time switched linear systems.

pub mod cli;
pub mod error;
pub mod lyapunov;
pub mod matrix;
pub mod pdmp;
pub mod plot;
pub mod projective;
pub mod reach;
pub mod signals;

pub use error::{Error, Result};
pub use matrix::{expm, monodromy, spectral_abscissa, spectral_radius, Mat, ModeSet};
pub use projective::{Angle, ProjPoint};
pub use signals::{Bang, DwellSignal, PeriodicSignal};
