use std::path::PathBuf;

use crate::ingest::ResourceId;

/// Errors surfaced by the analysis pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("missing required column(s): {}", .0.join(", "))]
    MissingColumns(Vec<String>),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("event log contains no records")]
    EmptyLog,

    #[error("unknown resource {0}")]
    UnknownResource(ResourceId),

    #[error("curriculum line {line}: {reason}")]
    Curriculum { line: u64, reason: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid generator parameters: {0}")]
    Params(String),

    #[error("comparison inputs do not match: {0}")]
    Mismatch(String),

    #[error("cannot render chart: {0}")]
    Chart(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
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
