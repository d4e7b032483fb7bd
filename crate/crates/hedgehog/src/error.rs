use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] hedgehog_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("image {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    /// Bad or conflicting settings; reported as a usage error.
    #[error("config: {0}")]
    Config(String),
    /// A required input of the computation is missing or unusable.
    #[error("precondition: {0}")]
    Precondition(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Process exit codes.
pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_PRECONDITION: u8 = 3;

impl Error {
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Core(e) if e.is_precondition() => EXIT_PRECONDITION,
            Error::Precondition(_) => EXIT_PRECONDITION,
            Error::Config(_) => EXIT_USAGE,
            _ => EXIT_FAIL,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| Error::Io { path, source }
    }

    pub(crate) fn json(path: impl Into<PathBuf>) -> impl FnOnce(serde_json::Error) -> Self {
        let path = path.into();
        move |source| Error::Json { path, source }
    }
}
