//! On-disk cache of rendered command outputs, keyed by [`crate::config::cache_key`].

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Overrides the cache location (default `<output_dir>/.cache`).
pub const CACHE_DIR_ENV: &str = "RABI_QUENCH_CACHE_DIR";

/// Everything a command produces: named files plus the text printed on stdout.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Output {
    pub files: Vec<(String, String)>,
    pub stdout: String,
}

#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// Environment override first, then `<output_dir>/.cache`.
    pub fn locate(output_dir: &Path) -> Self {
        match std::env::var_os(CACHE_DIR_ENV) {
            Some(d) if !d.is_empty() => Self::new(d),
            _ => Self::new(output_dir.join(".cache")),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn entry(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// `None` on a miss. A corrupt entry counts as a miss.
    pub fn get(&self, key: &str) -> Option<Output> {
        let bytes = fs::read(self.entry(key)).ok()?;
        serde_json::from_slice(&bytes).ok()
    }

    pub fn put(&self, key: &str, output: &Output) -> Result<(), CliError> {
        fs::create_dir_all(&self.dir)?;
        let body = serde_json::to_vec(output).map_err(|e| CliError::Io(e.to_string()))?;
        // write then rename so readers never see half an entry
        let tmp = self.dir.join(format!("{key}.json.tmp{}", std::process::id()));
        fs::write(&tmp, body)?;
        fs::rename(&tmp, self.entry(key))?;
        Ok(())
    }
}
