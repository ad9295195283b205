use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};

use super::table::ErrorTable;
use crate::error::Result;

/// `results/<run-id>/` with atomically replaced files.
#[derive(Clone, Debug)]
pub struct ResultsDir {
    path: PathBuf,
}

impl ResultsDir {
    pub fn create(root: &Path, run_id: &str) -> Result<Self> {
        let path = root.join(run_id);
        fs::create_dir_all(&path)?;
        Ok(Self { path })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn write_bytes(&self, name: &str, bytes: &[u8]) -> Result<()> {
        let tmp = self.path.join(format!(".{name}.tmp"));
        fs::write(&tmp, bytes)?;
        fs::rename(&tmp, self.path.join(name))?;
        Ok(())
    }

    /// `errors.csv`.
    pub fn write_errors(&self, table: &ErrorTable) -> Result<()> {
        let mut buf = Vec::new();
        table.write_csv(&mut buf)?;
        self.write_bytes("errors.csv", &buf)
    }

    /// Pretty-printed JSON under `name`.
    pub fn write_json<T: Serialize + ?Sized>(&self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }
}

/// Run directory name fixed by the experiment kind and seed.
pub fn run_id(kind: &str, seed: u64) -> String {
    format!("{kind}-{seed:016x}")
}
