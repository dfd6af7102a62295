use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}line {line}: {message}", path.as_ref().map(|p| format!("{}: ", p.display())).unwrap_or_default())]
    Config {
        path: Option<PathBuf>,
        line: usize,
        message: String,
    },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] multipolar::Error),

    #[error("output: {0}")]
    Output(String),
}

impl CliError {
    pub const VALIDATION: u8 = 2;
    pub const NUMERICAL: u8 = 3;

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if !e.is_validation() => Self::NUMERICAL,
            CliError::Output(_) => 1,
            _ => Self::VALIDATION,
        }
    }
}
