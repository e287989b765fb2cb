use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is missing, malformed, or out of range.
    #[error("invalid config `{field}`: {message}")]
    Config { field: String, message: String },

    /// An argument fell outside the domain of a model function.
    #[error("domain error: {0}")]
    Domain(String),

    /// The protocol name is recognised but has no election rule yet.
    #[error(
        "protocol `{0}` is not implemented; register it through the ClusteringProtocol plugin seam"
    )]
    NotImplemented(String),

    #[error("unknown protocol `{name}` (valid: {valid})")]
    UnknownProtocol { name: String, valid: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input rather than the environment.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config { .. }
                | Error::Domain(_)
                | Error::NotImplemented(_)
                | Error::UnknownProtocol { .. }
        )
    }
}
