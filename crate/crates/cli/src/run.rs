use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;

pub const RUN_MANIFEST: &str = "run_manifest.json";

/// Record of one command invocation, written next to its outputs.
#[derive(Serialize)]
pub struct RunManifest {
    pub command: &'static str,
    pub version: &'static str,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    /// Named random streams derived from the seed.
    pub seed_streams: Vec<String>,
    pub threads: usize,
    pub outputs: Vec<PathBuf>,
    pub started_unix: u64,
    pub duration_secs: f64,
}

pub struct Timer {
    started: SystemTime,
    clock: Instant,
}

impl Timer {
    pub fn start() -> Self {
        Timer {
            started: SystemTime::now(),
            clock: Instant::now(),
        }
    }
}

impl RunManifest {
    pub fn new(command: &'static str, config: impl Serialize, timer: &Timer) -> Result<Self> {
        Ok(RunManifest {
            command,
            version: env!("CARGO_PKG_VERSION"),
            config: serde_json::to_value(config)?,
            seed: None,
            seed_streams: Vec::new(),
            threads: 1,
            outputs: Vec::new(),
            started_unix: timer.started.duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            duration_secs: timer.clock.elapsed().as_secs_f64(),
        })
    }

    /// Writes to a temporary name first so readers never see a partial file.
    pub fn write(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("json.tmp");
        let text = serde_json::to_string_pretty(self)? + "\n";
        fs::write(&tmp, text).with_context(|| format!("writing {}", tmp.display()))?;
        fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))
    }
}

/// Creates `dir` unless it already exists with content.
pub fn fresh_dir(dir: &Path) -> Result<()> {
    if dir.exists() {
        let mut entries = fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))?;
        anyhow::ensure!(entries.next().is_none(), "output directory {} is not empty", dir.display());
    }
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}
