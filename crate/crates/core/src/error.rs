use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulator and its command-line front end.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter combination that cannot describe a valid model.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An argument outside the domain an operation accepts.
    #[error("usage error: {0}")]
    Usage(String),

    /// A tabular input is missing a required column or holds a malformed value.
    #[error("schema error in {path}: {message}")]
    Schema { path: PathBuf, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("cannot parse config {path}: {source}")]
    Toml {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Usage(msg.into()))
}
