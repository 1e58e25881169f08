use thiserror::Error;

/// Errors surfaced by every layer of the library.
///
/// The CLI maps these onto exit codes: hypothesis and schema problems exit
/// with 1, exhausted budgets with 2, broken internal invariants with 3.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid modulus {0}: not a prime")]
    InvalidModulus(u64),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("undeclared generator `{0}`")]
    UndeclaredGenerator(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid resolution: {0}")]
    InvalidResolution(String),
    #[error("invalid target sequence: {0}")]
    InvalidTarget(String),
    #[error("context mismatch: {0}")]
    ContextMismatch(String),
    #[error("budget exhausted: {0}")]
    Budget(String),
    #[error("schema error at `{field}`: {message}")]
    Schema { field: String, message: String },
    #[error("internal invariant failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
