//! Crate-wide error type. Validation failures (bad inputs, non-invertible
//! systems where invertibility is required) are distinct from numeric
//! failures (solver aborts, instability guards) so callers can map them to
//! different exit codes.

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input data violates a documented precondition.
    #[error("validation: {0}")]
    Validation(String),
    /// A numeric procedure failed or aborted (instability, explosion guard).
    #[error("numeric: {0}")]
    Numeric(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
