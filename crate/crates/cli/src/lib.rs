//! Configuration parsing and workflow orchestration for the `sbp` binary.

pub mod config;
pub mod run;

pub use config::{parse_config, parse_config_str, Command, ConfigError, RunConfig};
pub use run::{exit_code, run, RunError};
