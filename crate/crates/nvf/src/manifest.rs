//! Run manifests: what was run, with which settings, and how long it took.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::checkpoint::hex;
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

/// `git describe` output baked in at build time when available, otherwise
/// the package version.
pub fn version_string() -> String {
    match option_env!("NVF_GIT_DESCRIBE") {
        Some(v) => v.to_owned(),
        None => concat!("v", env!("CARGO_PKG_VERSION")).to_owned(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseReport {
    pub name: String,
    pub seconds: f64,
    /// Process high-water resident set size at the end of the phase.
    pub peak_rss_bytes: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    /// Hash of command, seed and configuration; identical reruns share it.
    pub run_id: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub deterministic: bool,
    pub config: serde_json::Value,
    pub phases: Vec<PhaseReport>,
    pub artifacts: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64, deterministic: bool, config: serde_json::Value) -> Self {
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        h.update(seed.to_le_bytes());
        h.update(config.to_string().as_bytes());
        RunManifest {
            run_id: hex(&h.finalize()[..8]),
            version: version_string(),
            command: command.to_owned(),
            seed,
            deterministic,
            config,
            phases: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    /// Runs `f`, recording its wall time and the memory high-water mark.
    pub fn phase<R>(&mut self, name: &str, f: impl FnOnce() -> R) -> R {
        let start = Instant::now();
        let r = f();
        self.phases.push(PhaseReport {
            name: name.to_owned(),
            seconds: start.elapsed().as_secs_f64(),
            peak_rss_bytes: peak_rss_bytes(),
        });
        r
    }

    pub fn artifact(&mut self, name: impl Into<String>) {
        self.artifacts.push(name.into());
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Invalid(e.to_string()))?;
        fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

fn peak_rss_bytes() -> Option<u64> {
    let status = fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}
