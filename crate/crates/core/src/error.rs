use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    /// A theorem hypothesis measured on the inputs does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("linear program {0}")]
    Solver(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
