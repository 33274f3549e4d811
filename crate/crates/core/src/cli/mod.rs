//! Configuration, orchestration and output for the `bogolab` binary.

mod config;
mod output;
mod run;

use thiserror::Error;

pub use config::{Command, ConfigError, CouplingSweep, Origin, OutputFormat, RunConfig, KEYS};
pub use output::{emit, format_float, Cell, EmitError, Table};
pub use run::{
    comparison_table, dump_operator, dump_tensor, error_tag, execute, run_compare, run_sweep, ComparisonRow,
    COMPARISON_HEADER,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),

    #[error("{}", describe(*.coupling, .source))]
    Numerical { coupling: f64, source: crate::Error },

    #[error("output error: {0}")]
    Emit(#[from] EmitError),

    #[error("i/o error: {0}")]
    Io(String),
}

fn describe(coupling: f64, source: &crate::Error) -> String {
    if coupling.is_nan() {
        source.to_string()
    } else {
        format!("g = {coupling}: {source}")
    }
}

impl RunError {
    pub(crate) fn numerical(coupling: f64, source: crate::Error) -> Self {
        RunError::Numerical { coupling, source }
    }

    pub fn exit_code(&self) -> i32 {
        use crate::Error as E;
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Numerical { source, .. } => match source {
                E::Capacity(_) => EXIT_CAPACITY,
                E::InvalidParameter(_) | E::InsufficientQuadrature { .. } | E::UnsupportedQuadrature(_) => EXIT_CONFIG,
                _ => EXIT_NUMERICAL,
            },
            RunError::Emit(_) | RunError::Io(_) => EXIT_IO,
        }
    }
}

/// Parses a configuration body with defaults for omitted keys.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    RunConfig::parse(text)
}

/// Builds a configuration from an optional file body and `key=value`
/// overrides, then validates it for `command`.
pub fn load_config(text: Option<&str>, overrides: &[String], command: Command) -> Result<RunConfig, ConfigError> {
    let mut config = match text {
        Some(text) => RunConfig::parse(text)?,
        None => RunConfig::default(),
    };
    for assignment in overrides {
        config.apply_override(assignment)?;
    }
    config.validate(command)?;
    Ok(config)
}
