//! Command-line front end for `orbitcov-core`.
//!
//! Scenarios are TOML files ([`config`]); results are CSV tables with a fixed
//! header plus a JSON companion ([`output`]). [`validate`] holds the
//! acceptance suite run by `orbitcov validate`.

pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod validate;

pub use config::ScenarioConfig;
pub use error::{exit, CliError};
pub use run::{cmd_coverage, cmd_geometry, cmd_sweep, RunOptions};
pub use validate::{run_all, ValidateOptions, ValidationReport};
