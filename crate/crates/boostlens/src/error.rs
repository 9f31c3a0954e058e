use std::path::{Path, PathBuf};

use boostlens_core::Error as CoreError;

/// Failure of a command, carrying enough context to name the offending
/// file, row or flag.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error("{0}")]
    Model(String),
    #[error("{context}: {source}")]
    Core { context: String, source: CoreError },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_MODEL: i32 = 4;

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn format(path: &Path, message: impl ToString) -> Self {
        Error::Format {
            path: path.to_path_buf(),
            message: message.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => EXIT_USAGE,
            Error::Io { .. } | Error::Format { .. } => EXIT_DATA,
            Error::Model(_) => EXIT_MODEL,
            Error::Core { source, .. } => match source {
                CoreError::InvalidConfig(_) => EXIT_USAGE,
                CoreError::DegenerateLeaf
                | CoreError::DimensionMismatch { .. }
                | CoreError::MalformedTree { .. }
                | CoreError::CapExceeded { .. }
                | CoreError::TreeFeatureCap { .. }
                | CoreError::MissingInteractions => EXIT_MODEL,
                _ => EXIT_DATA,
            },
        }
    }
}

/// Attaches a context string to core results.
pub trait Context<T> {
    fn context(self, context: impl FnOnce() -> String) -> Result<T>;
}

impl<T> Context<T> for std::result::Result<T, CoreError> {
    fn context(self, context: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|source| Error::Core {
            context: context(),
            source,
        })
    }
}
