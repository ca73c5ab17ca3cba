//! Grids, sampled fields, quadrature and the ħ-scaled Fourier transform.

pub mod field;
pub mod fit;
pub mod fourier;
pub mod grid;
pub mod quadrature;
pub mod schedule;

pub use field::{integrate_field, FieldHeader, SampledField};
pub use fit::{loglog_fit, LogLogFit};
pub use fourier::{hbar_fourier, hbar_fourier_onto, hbar_fourier_with, FourierOptions};
pub use grid::{Axis, GridSpec};
pub use schedule::HbarSchedule;

/// Float formatting used by every CSV writer: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
