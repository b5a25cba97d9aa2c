use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = FlowError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("state vector must have at least one coordinate")]
    EmptyState,

    #[error("non-finite value at coordinate {index}: {value}")]
    NonFiniteValue { index: usize, value: f64 },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite state produced at step {step}")]
    NonFiniteState { step: usize },

    #[error("non-finite draft state in round {round} at index {index}")]
    NonFiniteDraft { round: usize, index: usize },

    #[error("round cap of {max_rounds} exceeded at anchor {anchor}")]
    MaxRoundsExceeded { max_rounds: usize, anchor: usize },

    #[error("no progress in round {round}: rejection at {rejected} re-anchors at {anchor}")]
    NoProgress {
        round: usize,
        anchor: usize,
        rejected: usize,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("field file {path}: {message}")]
    FieldParse { path: String, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error("unknown field alias `{0}`")]
    UnknownAlias(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<FlowError>,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl FlowError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        FlowError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        FlowError::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}
