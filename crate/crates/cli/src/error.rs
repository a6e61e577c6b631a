//! Error-to-exit-code mapping: 2 for configuration problems, 3 for
//! protocol aborts, 1 for everything else.

use std::fmt;

use vfl_core::data::DataError;
use vfl_core::logreg::ProtocolError;
use vfl_core::revmul::AttackError;
use vfl_core::revsum::RevsumError;
use vfl_core::sboost::BoostError;

use crate::config::ConfigError;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Abort(String),
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Abort(_) => 3,
            CliError::Other(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Abort(m) => write!(f, "protocol abort: {m}"),
            CliError::Other(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<ProtocolError> for CliError {
    fn from(e: ProtocolError) -> Self {
        match e {
            ProtocolError::Abort { .. } => CliError::Abort(e.to_string()),
            ProtocolError::BadConfig(_) | ProtocolError::EmptyBatch => {
                CliError::Config(e.to_string())
            }
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<BoostError> for CliError {
    fn from(e: BoostError) -> Self {
        match e {
            BoostError::Abort { .. } => CliError::Abort(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<AttackError> for CliError {
    fn from(e: AttackError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<RevsumError> for CliError {
    fn from(e: RevsumError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(format!("io error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Other(format!("json error: {e}"))
    }
}
