use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Creates `<parent>/<prefix><UTC timestamp>-seed<seed>`, adding a counter
/// when the name is taken.
pub fn new_run_dir(parent: &Path, prefix: &str, seed: u64) -> Result<PathBuf> {
    fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    let stamp = Utc::now().format("%Y%m%dT%H%M%S%.3fZ");
    let base = format!("{prefix}{stamp}-seed{seed}");
    for k in 0.. {
        let name = if k == 0 { base.clone() } else { format!("{base}-{k}") };
        let dir = parent.join(name);
        match fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e).with_context(|| format!("creating {}", dir.display())),
        }
    }
    unreachable!()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    /// Path relative to the directory holding the manifest.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Per-run numbers worth keeping next to the artifacts.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub completed: bool,
    pub steps: u64,
    pub dt: f64,
    pub max_penetration: f64,
    pub elastic_energy: f64,
    pub kinetic_energy: f64,
    pub inserted_length: f64,
    pub packing_density: f64,
    pub class: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub args: Vec<String>,
    pub seed: u64,
    pub config: serde_json::Value,
    pub started_utc: String,
    pub wall_seconds: f64,
    pub artifacts: Vec<Artifact>,
    #[serde(default)]
    pub diagnostics: Option<Diagnostics>,
    #[serde(default)]
    pub error: Option<String>,
    pub exit_code: i32,
}

/// Collects the files a command writes into one directory and emits the
/// manifest last.
pub struct Recorder {
    pub dir: PathBuf,
    started: Instant,
    started_utc: String,
    artifacts: Vec<Artifact>,
}

impl Recorder {
    pub fn new(dir: PathBuf) -> Self {
        Self {
            dir,
            started: Instant::now(),
            started_utc: Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true),
            artifacts: Vec::new(),
        }
    }

    /// Writes `bytes` to `name` inside the directory and records it.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        write_atomic(&path, bytes)?;
        self.record(name)?;
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_vec_pretty(value)?;
        text.push(b'\n');
        self.write(name, &text)
    }

    /// Records a file some other code already wrote.
    pub fn record(&mut self, name: &str) -> Result<()> {
        let path = self.dir.join(name);
        let (bytes, sha256) = checksum(&path)?;
        self.artifacts.retain(|a| a.path != name);
        self.artifacts.push(Artifact {
            path: name.to_string(),
            bytes,
            sha256,
        });
        Ok(())
    }

    pub fn finish(
        self,
        command: &str,
        seed: u64,
        config: serde_json::Value,
        diagnostics: Option<Diagnostics>,
        error: Option<String>,
        exit_code: i32,
    ) -> Result<RunManifest> {
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            args: std::env::args().collect(),
            seed,
            config,
            started_utc: self.started_utc,
            wall_seconds: self.started.elapsed().as_secs_f64(),
            artifacts: self.artifacts,
            diagnostics,
            error,
            exit_code,
        };
        let mut text = serde_json::to_vec_pretty(&manifest)?;
        text.push(b'\n');
        write_atomic(&self.dir.join("manifest.json"), &text)?;
        Ok(manifest)
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("partial");
    {
        let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("renaming to {}", path.display()))?;
    Ok(())
}

pub fn checksum(path: &Path) -> Result<(u64, String)> {
    let mut f = fs::File::open(path).with_context(|| format!("reading {}", path.display()))?;
    let mut h = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    let mut total = 0u64;
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
        total += n as u64;
    }
    Ok((total, hex::encode(h.finalize())))
}
