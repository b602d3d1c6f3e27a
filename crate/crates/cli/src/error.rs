use std::io;
use std::process::ExitCode;

use optoent_core::Error as CoreError;
use thiserror::Error;

/// Process exit statuses.
pub mod status {
    pub const OK: u8 = 0;
    pub const CONFIG: u8 = 1;
    pub const UNSTABLE: u8 = 2;
    pub const NUMERICS: u8 = 3;
    pub const VALIDATION: u8 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{0}")]
    Core(#[from] CoreError),

    /// Instability with the closed-form criterion statement attached.
    #[error("{source}; closed-form criterion: {criterion}")]
    Unstable { source: CoreError, criterion: String },

    #[error("validation failed in group `{0}`")]
    Validation(String),

    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn status(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => status::CONFIG,
            CliError::Unstable { .. } => status::UNSTABLE,
            CliError::Validation(_) => status::VALIDATION,
            CliError::Core(e) => core_status(e),
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.status())
    }
}

pub fn core_status(e: &CoreError) -> u8 {
    match e.root() {
        CoreError::InvalidParameter { .. }
        | CoreError::InvalidTolerance(_)
        | CoreError::Domain(_)
        | CoreError::BracketTooSmall { .. } => status::CONFIG,
        CoreError::Unstable { .. } => status::UNSTABLE,
        CoreError::NonConvergence { .. }
        | CoreError::Singular { .. }
        | CoreError::Unphysical(_)
        | CoreError::Evaluation { .. } => status::NUMERICS,
    }
}

pub type CliResult<T> = Result<T, CliError>;
