use std::path::{Path, PathBuf};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] dsgnn_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    CheckFailed(String),
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn parse(path: &Path, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    /// Stable short tag used as the first field of the one-line error report.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Core(dsgnn_core::Error::InvalidParameters(_)) => "invalid-parameters",
            Error::Core(dsgnn_core::Error::InvalidInput(_)) => "invalid-input",
            Error::Core(dsgnn_core::Error::Shape(_)) => "shape",
            Error::Core(dsgnn_core::Error::NonFiniteLoss { .. }) => "non-finite-loss",
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::Config(_) => "config",
            Error::Usage(_) => "usage",
            Error::CheckFailed(_) => "check-failed",
        }
    }

    /// `error: <kind>: <message>` on a single line.
    pub fn one_line(&self) -> String {
        let message: String = self
            .to_string()
            .chars()
            .map(|c| if c == '\n' || c == '\r' { ' ' } else { c })
            .collect();
        format!("error: {}: {}", self.kind(), message.trim())
    }
}
