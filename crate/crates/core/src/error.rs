use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {0} is below 2")]
    InvalidDimension(usize),
    #[error("{0} is not prime")]
    NotPrime(usize),
    #[error("unknown subsystem `{0}`")]
    UnknownLabel(String),
    #[error("duplicate subsystem `{0}`")]
    DuplicateLabel(String),
    #[error("register mismatch: {0}")]
    RegisterMismatch(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("operator is not hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("operator is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),
    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),
    #[error("incomplete projective measurement: {0}")]
    IncompleteMeasurement(String),
    #[error("channel is not trace preserving (deviation {0:e})")]
    NotTracePreserving(f64),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("masker factorization residual {0:e} exceeds tolerance")]
    FactorizationFailed(f64),
    #[error("{role} may not access {what}")]
    ViewViolation { role: String, what: String },
    #[error("protocol phase error: {0}")]
    Phase(String),
    #[error("container format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
