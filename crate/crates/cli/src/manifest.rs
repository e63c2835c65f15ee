//! Run manifests: everything needed to reproduce a command's outputs.

use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use zfharq::sim::ExperimentConfig;

use crate::error::{CliError, CliResult};
use crate::jobs::{execute, Job};

pub const MANIFEST_JSON: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub seed: u64,
    pub job: Job,
    pub config: ExperimentConfig,
    pub runtime_seconds: f64,
    pub outputs: Vec<OutputFile>,
}

/// `v<crate version>`, plus the output of `git describe` when the binary
/// runs inside a work tree.
pub fn version_string() -> String {
    let base = format!("v{}", env!("CARGO_PKG_VERSION"));
    let describe = std::process::Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty());
    match describe {
        Some(d) => format!("{base}-g{d}"),
        None => base,
    }
}

pub fn sha256_file(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path)?;
    Ok(format!("{:x}", Sha256::digest(&bytes)))
}

impl RunManifest {
    pub fn new(job: Job, config: ExperimentConfig, runtime: Duration, out: &Path, files: &[String]) -> CliResult<Self> {
        let outputs = files
            .iter()
            .map(|f| {
                Ok(OutputFile {
                    file: f.clone(),
                    sha256: sha256_file(&out.join(f))?,
                })
            })
            .collect::<CliResult<_>>()?;
        Ok(Self {
            version: version_string(),
            seed: config.seed,
            job,
            config,
            runtime_seconds: runtime.as_secs_f64(),
            outputs,
        })
    }

    pub fn save(&self, dir: &Path) -> CliResult<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Runtime(e.to_string()))?;
        std::fs::write(dir.join(MANIFEST_JSON), text + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read manifest {}: {e}", path.display())))?;
        let m: Self = serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("manifest: {e}")))?;
        m.config.validate()?;
        Ok(m)
    }
}

/// Runs `job`, writes its outputs and a manifest into `out`.
pub fn run_and_record(job: Job, config: ExperimentConfig, out: &Path) -> CliResult<RunManifest> {
    let start = std::time::Instant::now();
    let files = execute(&job, &config, out)?;
    let manifest = RunManifest::new(job, config, start.elapsed(), out, &files)?;
    manifest.save(out)?;
    Ok(manifest)
}

/// Outcome of replaying a manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayReport {
    pub manifest: RunManifest,
    /// Files whose hash differs from the recorded one.
    pub mismatched: Vec<String>,
}

/// Re-runs a manifest's job into `out` and compares output hashes.
pub fn replay(manifest_path: &Path, out: &Path) -> CliResult<ReplayReport> {
    let recorded = RunManifest::load(manifest_path)?;
    let manifest = run_and_record(recorded.job.clone(), recorded.config.clone(), out)?;
    let mismatched = recorded
        .outputs
        .iter()
        .filter(|o| !manifest.outputs.iter().any(|n| n.file == o.file && n.sha256 == o.sha256))
        .map(|o| o.file.clone())
        .collect();
    Ok(ReplayReport { manifest, mismatched })
}
