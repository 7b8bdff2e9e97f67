use std::path::PathBuf;

use thiserror::Error;

/// Everything a run can fail with. Each variant has its own exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid parameters:\n  {}", .0.join("\n  "))]
    Param(Vec<String>),
    #[error("missing input file(s):\n  {}", .0.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join("\n  "))]
    MissingFile(Vec<PathBuf>),
    #[error("{0}")]
    NotConverged(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {msg}", path.display())]
    Format { path: PathBuf, msg: String },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("checks failed:\n  {}", .0.join("\n  "))]
    ChecksFailed(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Param(_) => 3,
            CliError::MissingFile(_) => 4,
            CliError::NotConverged(_) => 5,
            CliError::Io { .. } | CliError::Format { .. } => 6,
            CliError::Numerical(_) => 7,
            CliError::ChecksFailed(_) => 8,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl From<entropic_ot::Error> for CliError {
    fn from(e: entropic_ot::Error) -> Self {
        use entropic_ot::Error as E;
        match e {
            E::InvalidParameter(_) | E::Domain { .. } => CliError::Param(vec![e.to_string()]),
            E::NotConverged(_) => CliError::NotConverged(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
