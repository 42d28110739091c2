use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid ket {ket:?}: {reason}")]
    Ket { ket: String, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid bipartition: {0}")]
    Bipartition(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("unknown reference case {0:?}")]
    UnknownCase(String),
}
