//! Run directories and the manifest that indexes them.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use magscat::io::sha256_hex;
use serde::Serialize;

use crate::error::CliError;

pub const OUT_ENV: &str = "MAGSCAT_OUT";
pub const DEFAULT_OUT: &str = "magscat-runs";

#[derive(Debug, Clone, Serialize)]
pub struct OutputEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub code_version: String,
    pub seed: u64,
    pub jobs: Option<usize>,
    pub started_unix: f64,
    pub finished_unix: f64,
    /// achieved residuals and defects per stage
    pub tolerances: BTreeMap<String, f64>,
    pub outputs: Vec<OutputEntry>,
    pub notes: Vec<String>,
    pub status: String,
}

fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

/// A fresh directory collecting the artifacts of one run.
pub struct RunDir {
    pub root: PathBuf,
    files: Vec<PathBuf>,
    pub manifest: RunManifest,
}

impl RunDir {
    /// `<out>/<command>-<hash prefix>`, suffixed `-2`, `-3`, … when taken.
    pub fn create(out: &Path, command: &str, config_hash: &str, seed: u64, jobs: Option<usize>) -> Result<Self, CliError> {
        let io_err = |e: std::io::Error| CliError::config("output", e.to_string()).with_parameter(out.display().to_string());
        fs::create_dir_all(out).map_err(io_err)?;
        let base = format!("{command}-{}", &config_hash[..12]);
        let mut root = out.join(&base);
        let mut i = 1;
        loop {
            match fs::create_dir(&root) {
                Ok(()) => break,
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                    i += 1;
                    root = out.join(format!("{base}-{i}"));
                }
                Err(e) => return Err(io_err(e)),
            }
        }
        Ok(Self {
            root,
            files: Vec::new(),
            manifest: RunManifest {
                command: command.into(),
                config_hash: config_hash.into(),
                code_version: env!("CARGO_PKG_VERSION").into(),
                seed,
                jobs,
                started_unix: now(),
                finished_unix: 0.0,
                tolerances: BTreeMap::new(),
                outputs: Vec::new(),
                notes: Vec::new(),
                status: "running".into(),
            },
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let p = self.path(name);
        fs::write(&p, bytes).map_err(|e| CliError::numerical("output", e.to_string()).with_parameter(p.display().to_string()))?;
        self.files.push(p.clone());
        Ok(p)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::numerical("output", e.to_string()))?;
        self.write(name, &bytes)
    }

    /// Register files written by other code.
    pub fn track(&mut self, paths: impl IntoIterator<Item = PathBuf>) {
        self.files.extend(paths);
    }

    pub fn tolerance(&mut self, key: &str, value: f64) {
        let e = self.manifest.tolerances.entry(key.into()).or_insert(value);
        *e = e.max(value);
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.manifest.notes.push(s.into());
    }

    pub fn finish(mut self, status: &str) -> Result<PathBuf, CliError> {
        let mut outputs = Vec::new();
        for p in &self.files {
            let bytes = fs::read(p).map_err(|e| CliError::numerical("output", e.to_string()))?;
            outputs.push(OutputEntry {
                path: p.strip_prefix(&self.root).unwrap_or(p).display().to_string(),
                bytes: bytes.len() as u64,
                sha256: sha256_hex(&bytes),
            });
        }
        outputs.sort_by(|a, b| a.path.cmp(&b.path));
        self.manifest.outputs = outputs;
        self.manifest.finished_unix = now();
        self.manifest.status = status.into();
        let bytes = serde_json::to_vec_pretty(&self.manifest).map_err(|e| CliError::numerical("output", e.to_string()))?;
        let p = self.path("manifest.json");
        fs::write(&p, bytes).map_err(|e| CliError::numerical("output", e.to_string()))?;
        Ok(self.root)
    }
}
