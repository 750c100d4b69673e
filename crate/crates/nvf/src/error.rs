use std::io;
use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    /// Text input that could not be parsed; `line` and `column` are 1-based.
    #[error("{}:{line}:{column}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] nvf_core::Error),
    /// A binary file with a bad header, wrong version or short payload.
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error("checkpoint geometry {found} does not match scene geometry {expected}")]
    GeometryMismatch { expected: String, found: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// 2 for bad input (scene, config, arguments), 3 for failures while
    /// running.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Parse { .. } | Error::Invalid(_) => 2,
            Error::Core(e) => match e {
                nvf_core::Error::GeometryMismatch => 3,
                _ => 2,
            },
            Error::Io { .. } | Error::Format { .. } | Error::GeometryMismatch { .. } => 3,
        }
    }
}
