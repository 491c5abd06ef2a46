use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {0}: must be at least 1")]
    InvalidDimension(usize),
    #[error("point has {got} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("covariate {index} lies outside the unit cube")]
    OutOfCube { index: usize },
    #[error("{0}")]
    InvalidParameter(String),
    #[error("matrix is not symmetric (asymmetry {asymmetry:e} exceeds {tol:e})")]
    NotSymmetric { asymmetry: f64, tol: f64 },
    #[error("symmetric factorization of an active design failed at pivot {pivot}")]
    SolveFailure { pivot: usize },
    #[error("step CDF terminates at level {level}, expected 1")]
    UnterminatedCdf { level: f64 },
    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("risk value {0} is not positive")]
    NonPositiveRisk(f64),
    #[error("slope fit needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("unknown model spec: {0}")]
    UnknownSpec(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("dataset hash mismatch: manifest has {expected}, file has {actual}")]
    HashMismatch { expected: String, actual: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable code for the error kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidDimension(_) => "invalid-dimension",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::EmptyDataset => "empty-dataset",
            Error::OutOfCube { .. } => "out-of-cube",
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::NotSymmetric { .. } => "not-symmetric",
            Error::SolveFailure { .. } => "solve-failure",
            Error::UnterminatedCdf { .. } => "unterminated-cdf",
            Error::SizeMismatch { .. } => "size-mismatch",
            Error::NonPositiveRisk(_) => "nonpositive-risk",
            Error::TooFewPoints(_) => "too-few-points",
            Error::UnknownSpec(_) => "unknown-spec",
            Error::InvalidConfig(_) => "invalid-config",
            Error::HashMismatch { .. } => "hash-mismatch",
            Error::Csv(_) => "csv-failure",
            Error::Json(_) => "json-failure",
            Error::Io(_) => "io-failure",
        }
    }
}
