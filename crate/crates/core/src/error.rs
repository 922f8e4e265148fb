use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("row {row}: {message}")]
    Load { row: usize, message: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("no patterns")]
    NoPatterns,

    #[error("degenerate split: train_count {train_count} of {total} patterns")]
    DegenerateSplit { train_count: usize, total: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("training diverged at epoch {epoch} (non-finite error); lower the learning rate")]
    Divergence { epoch: usize },

    #[error("no active hidden nodes")]
    NoActiveHidden,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("epsilon exhausted at {epsilon} (floor {floor}): best accuracy {best_accuracy} < required {required}")]
    EpsilonExhausted {
        epsilon: f64,
        floor: f64,
        best_accuracy: f64,
        required: f64,
        best: Box<crate::clusterer::DiscretizedNetwork>,
    },

    #[error("rule extraction failed: {0}")]
    Extraction(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("nothing to render")]
    EmptyReport,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
