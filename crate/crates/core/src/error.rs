use thiserror::Error;

/// Errors raised by simulation, estimation and ingestion.
#[derive(Debug, Error)]
pub enum DarwinError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("zero level at index {index}")]
    ZeroLevel { index: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("level at index {index} overflows the floating range")]
    Overflow { index: usize },

    #[error("degenerate estimate: {0}")]
    Degenerate(&'static str),

    #[error("singular matrix: {0}")]
    Singular(&'static str),

    #[error("no stability boundary in range [{lo}, {hi}]")]
    NoStabilityBoundary { lo: f64, hi: f64 },

    #[error("row {row}: {reason}")]
    Data { row: usize, reason: String },

    #[error("column not found: {0}")]
    MissingColumn(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, DarwinError>;
