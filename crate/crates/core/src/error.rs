use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the learning, data and harness layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input domain: {0}")]
    Domain(String),

    #[error("singular STDP curve: |denominator| = {denominator:e} at delta_t = {delta_t}, t_pre = {t_pre}")]
    Singularity {
        delta_t: f64,
        t_pre: f64,
        denominator: f64,
    },

    #[error("configuration: {0}")]
    Config(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("numerical: {0}")]
    Numerical(String),

    #[error("non-finite weight after epoch {epoch}, batch {batch}")]
    NonFiniteWeights { epoch: usize, batch: usize },

    #[error("{path}: format error at byte {offset}: {reason}")]
    Idx {
        path: PathBuf,
        offset: u64,
        reason: String,
    },

    #[error("{path}: row {row}: {reason}")]
    Csv {
        path: PathBuf,
        row: usize,
        reason: String,
    },

    #[error("model file line {line}: {reason}")]
    ModelFormat { line: usize, reason: String },

    #[error("unsupported model file version: {0:?}")]
    ModelVersion(String),

    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}
