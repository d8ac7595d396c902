use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquareInput { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max |M - M^dagger| = {deviation:e})")]
    NonHermitianInput { deviation: f64 },

    #[error("matrix contains non-finite entries")]
    NonFiniteEntry,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("measurement scope {targets:?} out of range for {factors} tensor factors")]
    ScopeOutOfRange { targets: Vec<usize>, factors: usize },

    #[error("invalid quantum state: {0}")]
    InvalidState(String),

    #[error("not a qubit state (dimension {0})")]
    NotAQubit(usize),

    #[error("Bloch vector has norm {0} > 1")]
    BlochVectorTooLong(f64),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("invalid Kraus set: {0}")]
    InvalidKrausSet(String),

    #[error("optimizer failure: {0}")]
    OptimizerFailure(String),

    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),
}
