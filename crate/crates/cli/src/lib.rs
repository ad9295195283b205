//! Configuration, dispatch and result emission for the `chaosbench` binary.

pub mod config;
pub mod error;
pub mod manifest;
pub mod run;
mod tagged;

pub use config::{parse_config, parse_config_str, ExperimentKind, RunConfig};
pub use error::CliError;
pub use manifest::RunManifest;
pub use run::{execute, plan, Outcome};
