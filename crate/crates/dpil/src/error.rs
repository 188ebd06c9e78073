//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a precondition (bad range, empty set, ...).
    #[error("rejected input: {0}")]
    RejectedInput(String),

    /// Vector/matrix shapes do not line up.
    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimMismatch {
        what: String,
        expected: usize,
        got: usize,
    },

    /// A computation produced a non-finite value.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// A file could not be decoded; `record` is the 1-based line number.
    #[error("parse error at record {record}: {msg}")]
    Parse { record: usize, msg: String },

    /// Config validation; carries every problem found, not just the first.
    #[error("config validation failed:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),

    /// Wraps a pipeline stage failure with the stage name and root seed.
    #[error("stage {stage} failed (seed {seed}): {source}")]
    Stage {
        stage: String,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn rejected(msg: impl Into<String>) -> Self {
        Error::RejectedInput(msg.into())
    }

    pub fn dim(what: impl Into<String>, expected: usize, got: usize) -> Self {
        Error::DimMismatch {
            what: what.into(),
            expected,
            got,
        }
    }
}
