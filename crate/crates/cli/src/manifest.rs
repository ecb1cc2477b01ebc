//! Run manifest written next to every archive.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;

use procure::moea::{RunConfig, RunOutcome};

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub instance: PathBuf,
    pub config: RunConfig,
    pub threads: usize,
    pub archive: PathBuf,
    pub manifest: PathBuf,
    pub seed: u64,
    /// Seconds since the Unix epoch.
    pub started_at: u64,
    pub finished_at: u64,
    pub wall_seconds: f64,
    pub evaluations: u64,
    pub generations: u64,
    /// `PROCURE_COMMIT` if set, else the current git commit if any.
    pub commit: Option<String>,
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn commit_note() -> Option<String> {
    if let Ok(c) = std::env::var("PROCURE_COMMIT") {
        return Some(c);
    }
    let out = Command::new("git").args(["rev-parse", "--short", "HEAD"]).output().ok()?;
    out.status.success().then(|| String::from_utf8_lossy(&out.stdout).trim().to_owned())
}

impl RunManifest {
    pub fn new(
        instance: &Path,
        config: &RunConfig,
        archive: &Path,
        manifest: &Path,
        started_at: u64,
        wall: Duration,
        outcome: &RunOutcome,
    ) -> Self {
        RunManifest {
            instance: instance.to_path_buf(),
            config: config.clone(),
            threads: config.threads,
            archive: archive.to_path_buf(),
            manifest: manifest.to_path_buf(),
            seed: config.seed,
            started_at,
            finished_at: unix_now(),
            wall_seconds: wall.as_secs_f64(),
            evaluations: outcome.evaluations,
            generations: outcome.generations,
            commit: commit_note(),
        }
    }

    pub fn save(&self) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(&self.manifest, text).with_context(|| format!("writing {}", self.manifest.display()))
    }
}
