use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

/// Exit code for a completed run.
pub const EXIT_OK: i32 = 0;
/// Exit code for IO failures and failed reproduction criteria.
pub const EXIT_FAILURE: i32 = 1;
/// Exit code for invalid configuration.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code for numerical failures.
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] qmix_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },
    #[error("{failed} of {total} criteria failed")]
    ReproFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError::Config(message.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        use qmix_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Parse { .. } => EXIT_CONFIG,
            CliError::Core(
                E::InvalidParameter { .. }
                | E::UnsupportedPreset(_)
                | E::InvalidState(_)
                | E::OutsideBlochBall { .. }
                | E::NotHermitian { .. }
                | E::InvalidDensity(_)
                | E::GridNotDivisible { .. }
                | E::OffSphere { .. }
                | E::EmptyCloud
                | E::ProbeEqualsReference { .. }
                | E::IncompatibleRepresentations,
            ) => EXIT_CONFIG,
            CliError::Core(_) => EXIT_NUMERICAL,
            CliError::Io { .. } | CliError::ReproFailed { .. } => EXIT_FAILURE,
        }
    }
}
