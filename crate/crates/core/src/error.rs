use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Guard refusals (resolution, window, hypothesis checks) carry the name of
/// the guard that tripped so callers can report it verbatim.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("non-finite numeric input: {0}")]
    NumericInput(String),

    #[error("resolution guard `{guard}` violated: {detail}")]
    Resolution { guard: &'static str, detail: String },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("no critical point found: {0}")]
    NoCriticalPoint(String),

    #[error("degenerate critical point: {0}")]
    DegenerateCriticalPoint(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("inconsistent dimensions: {0}")]
    Inconsistency(String),

    #[error("spectral window insufficient: {0}")]
    WindowInsufficient(String),

    #[error("ambiguous phase-space center: {0}")]
    Ambiguity(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn resolution(guard: &'static str, detail: impl Into<String>) -> Self {
        Error::Resolution {
            guard,
            detail: detail.into(),
        }
    }

    /// Name of the numerical guard behind a refusal, `None` for plain
    /// parameter or input errors.
    pub fn guard_name(&self) -> Option<&'static str> {
        match self {
            Error::Resolution { guard, .. } => Some(guard),
            Error::NoCriticalPoint(_) => Some("critical-point-search"),
            Error::DegenerateCriticalPoint(_) => Some("hessian-condition"),
            Error::HypothesisViolation(_) => Some("regular-value"),
            Error::Inconsistency(_) => Some("excess-nonnegative"),
            Error::WindowInsufficient(_) => Some("spectral-window"),
            Error::Ambiguity(_) => Some("single-cluster"),
            Error::Geometry(_) => Some("closed-loop"),
            Error::Parameter(_) | Error::NumericInput(_) => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
