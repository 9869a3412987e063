use std::path::PathBuf;
use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("i/o: {0}")]
    Stdio(#[from] std::io::Error),

    #[error(transparent)]
    Core(#[from] rankone::Error),
}

/// A verification suite ran and at least one report failed.
pub const EXIT_FAILED: u8 = 1;

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Self::Usage(_) | Self::Parse(_) => 2,
            Self::Core(rankone::Error::Parameter(_)) => 2,
            Self::Core(rankone::Error::Unsupported(_)) => 3,
            Self::Io { .. } | Self::Stdio(_) => 4,
            Self::Core(_) => 5,
        })
    }
}
