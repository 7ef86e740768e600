//! Command implementations behind the `postadc` binary.

pub mod commands;
pub mod scan;
pub mod toy;

use std::path::Path;

use postadc_harness::{apply_overrides, expand_grid, parse_config, ConfigGrid, HarnessError};

pub use commands::{cmd_dump_constraints, cmd_infer, cmd_sweep};
pub use scan::{cmd_scan_verify, ScanReport};
pub use toy::{cmd_toy_check, ToyReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_VERIFICATION: i32 = 4;
pub const EXIT_DEGENERATE: i32 = 5;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("degenerate selection: {0}")]
    Degenerate(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Verification(_) => EXIT_VERIFICATION,
            CliError::Degenerate(_) => EXIT_DEGENERATE,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<postadc_core::Error> for CliError {
    fn from(e: postadc_core::Error) -> Self {
        use postadc_core::Error as E;
        match e {
            E::InvalidArgument(m) => CliError::Config(m),
            E::DegenerateSelection(m) => CliError::Degenerate(m),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Core(c) => c.into(),
            HarnessError::Io(io) => CliError::Io(io),
            HarnessError::Config(m) | HarnessError::Data(m) => CliError::Config(m),
            HarnessError::Csv(e) => CliError::Config(e.to_string()),
        }
    }
}

/// Reads the optional config file, applies `key=value` overrides and expands
/// the sweep grid.
pub fn load_grid(config_path: Option<&Path>, overrides: &[String]) -> Result<ConfigGrid, CliError> {
    let mut table = match config_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            parse_config(&text)?
        }
        None => Default::default(),
    };
    apply_overrides(&mut table, overrides)?;
    Ok(expand_grid(&table)?)
}
