//! Numerical toolkit for semiclassical isotropic states: model states and
//! coherent-state superpositions, phase functions and oscillatory integrals,
//! Husimi diagnostics, Schrödinger spectra and wavepacket propagation.

pub mod error;
pub mod linalg;
pub mod numerics;
pub mod phase;
pub mod profiles;
pub mod propagation;
pub mod spectra;
pub mod states;
pub mod wavefront;

pub use error::{Error, Result};
pub use num_complex::Complex64;
