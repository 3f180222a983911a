use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the feature extraction, modelling and evaluation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("dataset {path}: {message}")]
    Dataset { path: PathBuf, message: String },

    #[error("duplicate qualified name {name}: {first} and {second}")]
    DuplicateQualifiedName {
        name: String,
        first: PathBuf,
        second: PathBuf,
    },

    #[error("duplicate dataset row for {0}")]
    DuplicateDatasetRow(String),

    #[error("no source file matches any dataset row")]
    EmptyIntersection,

    #[error("no baseline metrics")]
    NoBaselineMetrics,

    #[error("heterogeneous baseline metrics in: {}", .0.join(", "))]
    HeterogeneousMetrics(Vec<String>),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("topic count {topics} exceeds total token count {tokens}")]
    TooManyTopics { topics: usize, tokens: usize },

    #[error("empty vocabulary")]
    EmptyVocabulary,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no scorable feature columns")]
    NoScorableFeatures,

    #[error("all feature columns have zero variance")]
    AllZeroVariance,

    #[error("feature mismatch: {0}")]
    FeatureMismatch(String),

    #[error("empty test fold")]
    EmptyTestFold,

    #[error("artifact {path}: {message}")]
    Artifact { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
