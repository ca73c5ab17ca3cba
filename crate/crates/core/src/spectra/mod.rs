//! Discretized Schrödinger operators on flat tori and the trace and
//! counting comparisons built on their spectra.

pub mod eigen;
pub mod gamma;
pub mod liouville;
pub mod potential;
pub mod problem;
pub mod trace;

pub use eigen::{diagonalize, diagonalize_all, diagonalize_with, harmonic_surrogate, DiagonalizeOptions, SpectrumResult};
pub use gamma::{gamma, gamma_decay, GammaDecayReport};
pub use liouville::{liouville_measure, LevelSetMeasure, LiouvilleMethod};
pub use potential::{Potential, TrigKind, TrigTerm};
pub use problem::{Domain, SchrodingerProblem};
pub use trace::{
    apply_p_phi, assemble_kernel, profile_integral, scaled_trace_check, trace_series, weyl_count_check,
    CountComparison, TraceComparison, TraceSeries,
};
