use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("length mismatch: {left} vs {right}; {hint}")]
    LengthMismatch {
        left: usize,
        right: usize,
        hint: &'static str,
    },

    #[error("input is not sorted ascending")]
    Unsorted,

    #[error("problem too large for exhaustive search: {rows}x{cols} (cap {cap})")]
    TooLarge {
        rows: usize,
        cols: usize,
        cap: usize,
    },

    #[error("pair ({i}, {j}): {source}")]
    Pair {
        i: usize,
        j: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True when a distance method refused its inputs (unequal lengths,
    /// mismatched dimensions), as opposed to bad configuration or unreadable
    /// data. Pair errors are classified by their cause.
    pub fn is_method_precondition(&self) -> bool {
        match self {
            Error::Pair { source, .. } => source.is_method_precondition(),
            Error::DimensionMismatch { .. } | Error::LengthMismatch { .. } => true,
            _ => false,
        }
    }
}
