use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("operation is undefined on the extended (+inf) element")]
    ExtendedValue,

    #[error("element is not positive: eigenvalue {eigenvalue:e} is below -{tol:e}")]
    NotPositive { eigenvalue: f64, tol: f64 },

    #[error("element is not self-adjoint: max |a - a*| entry is {asymmetry:e}")]
    NotSelfAdjoint { asymmetry: f64 },

    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },

    #[error("point variants do not match: {0}")]
    PointKind(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("search diverged: {0}")]
    Divergence(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("instance is inconsistent: {check} residual {residual:e} exceeds {tol:e}")]
    InconsistentInstance { check: String, residual: f64, tol: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
