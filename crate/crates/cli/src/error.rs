use std::path::PathBuf;

use gprc_core::Error as CoreError;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("simulation aborted: {0}")]
    Simulation(CoreError),

    #[error("design failed: {0}")]
    Design(CoreError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Io { .. } => 1,
            Self::Simulation(_) => 2,
            Self::Design(_) => 3,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| Self::Io { path, source }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::DesignInfeasible(_)
            | CoreError::InversionFailed(_)
            | CoreError::IllPosedLoop(_) => Self::Design(e),
            CoreError::Diverged { .. }
            | CoreError::NonFinite { .. }
            | CoreError::IllConditionedGram { .. } => Self::Simulation(e),
            other => Self::Config(other.to_string()),
        }
    }
}
