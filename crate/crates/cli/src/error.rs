use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Simulation(#[from] photon_echo::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(CliError::Usage(msg.into()))
}

impl CliError {
    /// 2 for bad input, 3 for numerical failures, 1 for I/O.
    pub fn exit_code(&self) -> u8 {
        use photon_echo::Error as E;
        match self {
            Self::Usage(_) | Self::Simulation(E::InvalidParameter(_) | E::DimensionMismatch { .. }) => 2,
            Self::Simulation(_) => 3,
            Self::Io(_) | Self::Csv(_) | Self::Json(_) => 1,
        }
    }
}
