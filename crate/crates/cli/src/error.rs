use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("no periodic orbit for r ≤ π²/2 (r = {0})")]
    NoOrbit(f64),
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    PositivityLoss(String),
    #[error("bad history file {}: {reason}", path.display())]
    BadHistory { path: PathBuf, reason: String },
    #[error("{0}")]
    CheckFailed(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::CheckFailed(_) => 1,
            CliError::NoOrbit(_) | CliError::Invalid(_) => 2,
            CliError::PositivityLoss(_) => 3,
            CliError::BadHistory { .. } => 4,
            CliError::Io(_) => 5,
            CliError::Numerical(_) => 6,
        }
    }
}
