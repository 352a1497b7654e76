//! Crate-wide error type.

use std::path::PathBuf;

/// Errors surfaced by the engine. Record-level parse issues are *not* errors;
/// they are collected and reported alongside the parsed log.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("model serialization error: {0}")]
    Model(#[from] serde_json::Error),

    #[error("training data contains a single outcome class")]
    SingleClass,

    #[error("ensemble requires at least 2 members, got {0}")]
    EnsembleTooSmall(usize),

    #[error("{arm} arm has {count} instances, need at least {floor}")]
    ThinArm {
        arm: &'static str,
        count: usize,
        floor: usize,
    },

    #[error("feature vector length {got} does not match schema length {expected}")]
    SchemaMismatch { expected: usize, got: usize },

    #[error("temporal split needs at least 3 traces, got {0}")]
    TooFewTraces(usize),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
