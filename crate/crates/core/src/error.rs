use std::io;

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch for {what}: expected {expected}, got {actual}")]
    Dimension {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid layout: {0}")]
    Layout(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{units} free units is too many for exact enumeration (limit {limit})")]
    TooLargeForEnumeration { units: usize, limit: usize },

    #[error("sample set is empty")]
    EmptySampleSet,

    #[error("batch is empty")]
    EmptyBatch,

    #[error("metric undefined: {0}")]
    MetricUndefined(&'static str),

    #[error("graph error: {0}")]
    Graph(String),

    #[error("no embedding of K_{k} found in region of {region_size} nodes after {attempts} attempts")]
    EmbeddingNotFound {
        k: usize,
        region_size: usize,
        attempts: usize,
    },

    #[error("region {region}: {source}")]
    Region {
        region: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
