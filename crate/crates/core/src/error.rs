use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("every token was removed by the vocabulary filters")]
    EmptyVocabulary,
    #[error("token `{0}` is not in the vocabulary")]
    UnknownToken(String),
    #[error("invalid hyperparameter: {0}")]
    InvalidHyper(String),
    #[error("constitution `{0}` has no year")]
    MissingYear(String),
    #[error("edge {src} -> {dst} does not respect time order ({src_time} >= {dst_time})")]
    TimeOrderViolation {
        src: String,
        dst: String,
        src_time: f64,
        dst_time: f64,
    },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },
    #[error("missing artifact: {}", .0.display())]
    MissingArtifact(PathBuf),
    #[error("i/o error on {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
