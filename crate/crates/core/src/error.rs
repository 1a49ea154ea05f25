use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure classes, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Training,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("unknown state code {0:?}")]
    UnknownState(String),

    #[error("invalid date {0:?} (expected YYYY-MM-DD)")]
    InvalidDate(String),

    #[error("date {date} outside window {start}..{end}")]
    DateOutOfWindow {
        date: String,
        start: String,
        end: String,
    },

    #[error("duplicate entry {0:?}")]
    Duplicate(String),

    #[error("unknown keyword category {0:?}")]
    UnknownCategory(String),

    #[error("{0} is empty")]
    Empty(&'static str),

    #[error("valence {value} for {token:?} outside [-4, 4]")]
    ValenceOutOfRange { token: String, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unseen {field} value {value:?}")]
    UnseenCategory { field: &'static str, value: String },

    #[error("training data contains a single class")]
    SingleClass,

    #[error("minority class has {0} sample(s); at least 2 are required")]
    MinorityTooSmall(usize),

    #[error("feature dimension mismatch: model expects {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite feature value")]
    NonFiniteFeature,

    #[error("token id {id} outside vocabulary of size {size}")]
    TokenOutOfRange { id: usize, size: usize },

    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },

    #[error("config: {0}")]
    Config(String),

    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn malformed(line: usize, message: impl Into<String>) -> Self {
        Error::Malformed {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }

    /// Wraps an error with the pipeline stage that produced it.
    pub fn at_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// The pipeline stage, if this error was tagged with one.
    pub fn stage(&self) -> Option<&'static str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Stage { source, .. } => source.class(),
            Error::Config(_) | Error::InvalidArgument(_) => ErrorClass::Config,
            Error::SingleClass
            | Error::MinorityTooSmall(_)
            | Error::NonFiniteLoss { .. }
            | Error::DimensionMismatch { .. }
            | Error::NonFiniteFeature => ErrorClass::Training,
            _ => ErrorClass::Data,
        }
    }
}
