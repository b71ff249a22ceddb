use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed JSON, a wrong type, or an unknown key.
    #[error("parse error at line {line}, column {column} (field `{field}`): {message}")]
    Parse {
        field: String,
        line: usize,
        column: usize,
        message: String,
    },

    /// A well-formed scenario whose parameters violate a model invariant.
    #[error("invalid `{field}`: {source}")]
    Validation {
        field: String,
        #[source]
        source: qsync_core::Error,
    },

    /// A scenario-level constraint that has no counterpart in the models.
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: String, reason: String },

    #[error("{context}: {source}")]
    Simulation {
        context: String,
        #[source]
        source: qsync_core::Error,
    },

    #[error("{0}")]
    Unsupported(String),

    #[error("serialization failed: {0}")]
    Serialize(String),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>) -> impl FnOnce(qsync_core::Error) -> Self {
        let field = field.into();
        move |source| Error::Validation { field, source }
    }

    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn simulation(context: impl Into<String>) -> impl FnOnce(qsync_core::Error) -> Self {
        let context = context.into();
        move |source| Error::Simulation { context, source }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| Error::Io { path, source }
    }
}
