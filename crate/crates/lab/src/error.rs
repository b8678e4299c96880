use std::path::PathBuf;

/// Failures of a CLI run, each with its own exit code.
#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("config error: {0}")]
    Config(String),
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("compute error: {0}")]
    Compute(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Compute(_) | LabError::Io { .. } => 1,
            LabError::Config(_) => 2,
            LabError::Resolution(_) => 3,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<harmap_core::Error> for LabError {
    fn from(e: harmap_core::Error) -> Self {
        use harmap_core::Error as E;
        match e {
            E::Resolution(_) => LabError::Resolution(e.to_string()),
            E::Parameter(_) | E::Input(_) => LabError::Config(e.to_string()),
            _ => LabError::Compute(e.to_string()),
        }
    }
}

pub type LabResult<T> = Result<T, LabError>;
