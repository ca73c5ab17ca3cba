//! Phase functions, their non-degeneracy checks and oscillatory integrals.

pub mod excess;
pub mod function;
pub mod integral;
pub mod pushforward;
pub mod validate;

pub use excess::{dims_from_phase_counts, excess, CleanIntersectionDims};
pub use function::{compose_phase, fourier_relation, identity_relation, model_phase, PhaseFunction, PhaseSpec, QuadraticForm};
pub use integral::{
    find_fiber_critical_points, oscillatory_integral, oscillatory_integral_with, stationary_phase_leading, Amplitude,
    AmplitudeTerm, QuadratureOptions, StationaryPhaseResult,
};
pub use pushforward::pushforward;
pub use validate::{validate_phase, SampleCheck, ValidationReport};
