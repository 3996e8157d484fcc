use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error in {file} at line {line}: {msg}")]
    Parse {
        file: String,
        line: usize,
        msg: String,
    },
    #[error("dataset integrity error: {0}")]
    Integrity(String),
    #[error("infeasible split: {0}")]
    InfeasibleSplit(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("embedding training error: {0}")]
    Training(String),
    #[error("unknown fragment id {0}")]
    UnknownFragment(usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("instance too large for exact solver: {rows}x{cols} (max 8x8)")]
    TooLarge { rows: usize, cols: usize },
    #[error("distance between graphs {0} and {1} failed: {2}")]
    PairDistance(usize, usize, Box<Error>),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("classifier error: {0}")]
    Classifier(String),
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
