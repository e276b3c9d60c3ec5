use std::path::PathBuf;

use thiserror::Error;

/// Exit status for validation failures.
pub const EXIT_VALIDATION: i32 = 1;
/// Exit status for numeric failures and failed verification checks.
pub const EXIT_NUMERIC: i32 = 2;
/// Exit status for filesystem errors.
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot parse `{key}`: {message}")]
    Parse { key: String, message: String },
    #[error("invalid configuration: {0}")]
    Validation(String),
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numeric failure{}: {source}", at.map(|t| format!(" at t = {t} a.u.")).unwrap_or_default())]
    Numeric {
        at: Option<f64>,
        #[source]
        source: qfts_core::Error,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_VALIDATION,
            RunError::Numeric { .. } => EXIT_NUMERIC,
            RunError::Io { .. } => EXIT_IO,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        RunError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<qfts_core::Error> for RunError {
    fn from(source: qfts_core::Error) -> Self {
        let at = match source {
            qfts_core::Error::NonFinite { t } => Some(t),
            _ => None,
        };
        RunError::Numeric { at, source }
    }
}
