//! Command-line runner: reads a TOML run configuration, dispatches one
//! experiment, and writes its curves and fit summary.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod runner;

pub use config::{load_config, reference_config, RunConfig};
pub use runner::{run, RunReport};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("simulation failed: {0}")]
    Simulation(#[from] dualtype_core::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Simulation(dualtype_core::Error::FitRejected(_)) => 3,
            CliError::Simulation(_) => 2,
            CliError::Io { .. } => 4,
        }
    }
}

/// Exit status for a run whose fits did not all converge.
pub const EXIT_NON_CONVERGENCE: u8 = 3;
