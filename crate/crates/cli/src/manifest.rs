use std::time::SystemTime;

use serde::Serialize;

use crate::config::RunConfig;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Stage {
    pub name: String,
    pub seconds: f64,
}

/// Written last, once every result file is in place.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub run_id: String,
    pub version: String,
    pub config: RunConfig,
    pub started: String,
    pub finished: String,
    pub total_seconds: f64,
    pub stages: Vec<Stage>,
    pub warnings: Vec<String>,
    /// `None` when the run carries no acceptance assertion.
    pub passed: Option<bool>,
}

pub fn timestamp() -> String {
    humantime::format_rfc3339_millis(SystemTime::now()).to_string()
}

/// `git describe` output captured at build time, else the package version.
pub fn version() -> String {
    match option_env!("CHAOSBENCH_GIT_DESCRIBE") {
        Some(v) if !v.is_empty() => format!("{} ({v})", env!("CARGO_PKG_VERSION")),
        _ => env!("CARGO_PKG_VERSION").to_string(),
    }
}
