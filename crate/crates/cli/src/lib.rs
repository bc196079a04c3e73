//! Configuration, dispatch and deterministic persistence for `specshift` runs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::{check, validate_config, ExperimentConfig, ExperimentKind};
pub use error::RunError;
pub use output::{config_hash, Check, Outcome, Table, FORMAT_VERSION};
pub use run::{default_output, execute, run_experiment};

/// Exit status for a successful run whose declared checks all passed.
pub const EXIT_OK: u8 = 0;
/// Exit status for errors of any kind.
pub const EXIT_ERROR: u8 = 1;
/// Exit status when the computation succeeded but a declared check failed.
pub const EXIT_CHECK_FAILED: u8 = 2;
