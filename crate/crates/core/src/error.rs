use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("unknown {kind} `{id}`")]
    Lookup { kind: &'static str, id: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("coverage error: {0}")]
    Coverage(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("computation error: {0}")]
    Computation(String),

    #[error("training error: {0}")]
    Training(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn unknown_referee(id: &str) -> Self {
        Error::Lookup {
            kind: "referee",
            id: id.to_string(),
        }
    }

    pub(crate) fn unknown_paper(id: &str) -> Self {
        Error::Lookup {
            kind: "paper",
            id: id.to_string(),
        }
    }

    /// Whether the error stems from bad input rather than a failed computation.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Computation(_) | Error::Training(_))
    }
}
