use std::path::PathBuf;

use recgame_core::format::FormatError;
use recgame_core::simulate::SimError;
use recgame_core::strategy::{CertificateFailure, StrategyError};
use recgame_core::values::ValuesError;
use recgame_core::GameError;
use recgame_signals::SignalError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Values(#[from] ValuesError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error("certificate: {0}")]
    Certificate(#[from] CertificateFailure),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Signal(#[from] SignalError),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }
}
