use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {dim}: {reason}")]
    InvalidDimension { dim: usize, reason: &'static str },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid projector: {0}")]
    InvalidProjector(String),

    #[error("unsupported family {kind} at d={dim}: {reason}")]
    UnsupportedFamily { kind: String, dim: usize, reason: &'static str },

    #[error("projector family failed validation: {0}")]
    InvalidFamily(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("dataset is all zeros")]
    ZeroDataset,

    #[error("estimate collapsed to the zero vector")]
    DegenerateEstimate,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid optical geometry: {0}")]
    Geometry(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
