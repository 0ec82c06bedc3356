//! Library side of the `optrack` command: config documents, CSV log
//! schemas and the `simulate`, `postprocess` and `metrics` commands.
//!
//! Exit codes are shared by every command: 0 on success, 2 for config or
//! schema problems, 3 for runtime failures.

use thiserror::Error;

pub mod config;
pub mod metrics;
pub mod postprocess;
pub mod schema;
pub mod simulate;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Schema(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}
