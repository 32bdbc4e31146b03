use thiserror::Error;

/// Errors surfaced by state construction, channel application, and experiments.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("dimension cap exceeded: {got} > {cap}")]
    DimCapExceeded { got: usize, cap: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("eigensolver failed to converge after {0} sweeps")]
    EigNoConvergence(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
