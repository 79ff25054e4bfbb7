use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("parse error at row {row}, column `{column}`: cannot read {value:?} as a number")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error("k = {k} exceeds the {available} available candidates")]
    TooFewCandidates { k: usize, available: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A resampler could not produce output for this input.
    #[error("{0}")]
    Resample(String),

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("unknown method `{0}`")]
    UnknownMethod(String),

    #[error("unknown metric `{0}`")]
    UnknownMetric(String),

    #[error("model selection failed: {0}")]
    ModelSelection(String),

    #[error("report error: {0}")]
    Report(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
