use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

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

    #[error("schema error: {0}")]
    Schema(String),

    #[error("parse error at row {row}, column '{column}': {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("unsupported target: label column '{column}' has {found} distinct values, expected 2")]
    UnsupportedTarget { column: String, found: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("dataset contains a single class; both classes are required")]
    SingleClass,

    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error("invalid weight schema: {0}")]
    InvalidSchema(String),

    #[error(
        "minority sample {index} has category '{category}' which the weight schema does not map"
    )]
    UnknownCategory { index: usize, category: String },

    #[error("dataset has no category column; EAT weighting needs one")]
    MissingCategories,

    #[error("degenerate weights: {0}")]
    DegenerateWeights(String),

    #[error("degenerate pair: samples {seed} and {neighbor} both have zero weight")]
    DegeneratePair { seed: usize, neighbor: usize },

    #[error("k = {k} is too large for a pool of {available} candidate neighbours")]
    KTooLarge { k: usize, available: usize },

    #[error("dimension mismatch: expected {expected} features, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("nothing to generate: classes are already balanced (no-op)")]
    NothingToGenerate,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("non-finite feature value at row {row}, feature {feature}")]
    NonFinite { row: usize, feature: usize },

    #[error("incomplete sweep: {0}")]
    IncompleteSweep(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
