use thiserror::Error;

/// Errors raised by the witness pipeline and its building blocks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("not a state: {0}")]
    NotAState(String),
    #[error("normalization: trace {trace} deviates from 1 by more than 1e-9")]
    Normalization { trace: f64 },
    #[error("out of domain: {0}")]
    OutOfDomain(String),
    #[error("geometry: {0}")]
    Geometry(String),
}

pub type Result<T> = std::result::Result<T, Error>;
