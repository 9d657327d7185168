use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("state vector is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("not a valid density matrix: {0}")]
    NotDensityMatrix(String),
    #[error("invalid POVM: {0}")]
    InvalidPovm(String),
    #[error("POVM is not projector-valued")]
    NotProjective,
    #[error("collapse on branch with probability {0:.3e} below threshold")]
    UndefinedCollapse(f64),
    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),
    #[error("channel is not completely positive (min Choi eigenvalue {0:.3e})")]
    NotCompletelyPositive(f64),
    #[error("channel is not trace preserving (deviation {0:.3e})")]
    NotTracePreserving(f64),
    #[error("best-response search unsupported for this strategy space")]
    UnsupportedSearch,
    #[error("no interior mixed equilibrium for this table")]
    NoInteriorEquilibrium,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
