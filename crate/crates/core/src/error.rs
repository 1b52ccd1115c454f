use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Each variant maps onto one failure class of the verifiers; callers that
/// need an exit code (the CLI) match on the variant, not on the message.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported regime: {0}")]
    Unsupported(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("ill-conditioned: {0}")]
    Conditioning(String),
    #[error("singular point: {0}")]
    SingularPoint(String),
    #[error("stencil does not fit: {0}")]
    Stencil(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("no admissible points: {0}")]
    EmptyDomain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

macro_rules! domain {
    ($($arg:tt)*) => { $crate::error::LabError::Domain(format!($($arg)*)) };
}
pub(crate) use domain;
