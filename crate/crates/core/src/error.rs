use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-physical value {value} for {var} at flat index {index}")]
    Positivity { var: String, index: usize, value: f64 },

    #[error("at least 3 solutions are required, got {0}")]
    Underdetermined(usize),

    #[error("solutions do not share grid and variable layout: {0}")]
    IncompatibleEnsemble(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("malformed field file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
