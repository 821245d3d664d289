use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, bad values, or parameters the model rejects.
    #[error("{0}")]
    Usage(String),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            CliError::Io { .. } | CliError::Runtime(_) => ExitCode::from(1),
        }
    }
}

impl From<qpisde::Error> for CliError {
    fn from(e: qpisde::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}
