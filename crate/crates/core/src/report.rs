//! Artifact output: CSV tables, line-delimited JSON records, two-column
//! curve files, and an append-only manifest describing every run.

use crate::error::{Error, Result};
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

pub const MANIFEST_FILE: &str = "manifest.jsonl";

/// One line of the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub run_id: String,
    pub subcommand: String,
    pub parameters: Map<String, Value>,
    pub version: String,
    /// Seconds since the Unix epoch at start.
    pub started: f64,
    pub wall_clock_seconds: f64,
    /// Cache file digests by weight.
    pub cache_digests: BTreeMap<String, String>,
    pub artifacts: Vec<String>,
    pub exit_code: i32,
}

/// Output directory for one run; artifacts carry the run id in their name.
#[derive(Debug)]
pub struct RunOutput {
    root: PathBuf,
    manifest: RunManifest,
    clock: Instant,
}

impl RunOutput {
    pub fn new(root: impl Into<PathBuf>, subcommand: &str, parameters: Map<String, Value>) -> Result<Self> {
        let root = root.into();
        std::fs::create_dir_all(&root)?;
        let now = SystemTime::now().duration_since(UNIX_EPOCH).unwrap_or_default();
        let mut h = Sha256::new();
        h.update(subcommand.as_bytes());
        h.update(Value::Object(parameters.clone()).to_string().as_bytes());
        h.update(now.as_nanos().to_le_bytes());
        h.update(std::process::id().to_le_bytes());
        let run_id = hex::encode(&h.finalize()[..6]);
        Ok(RunOutput {
            root,
            manifest: RunManifest {
                run_id,
                subcommand: subcommand.to_string(),
                parameters,
                version: env!("CARGO_PKG_VERSION").to_string(),
                started: now.as_secs_f64(),
                wall_clock_seconds: 0.0,
                cache_digests: BTreeMap::new(),
                artifacts: Vec::new(),
                exit_code: 0,
            },
            clock: Instant::now(),
        })
    }

    pub fn run_id(&self) -> &str {
        &self.manifest.run_id
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest(&self) -> &RunManifest {
        &self.manifest
    }

    pub fn record_digest(&mut self, key: impl Into<String>, digest: impl Into<String>) {
        self.manifest.cache_digests.insert(key.into(), digest.into());
    }

    fn artifact_path(&mut self, name: &str, ext: &str) -> PathBuf {
        let file = format!("{}-{}-{name}.{ext}", self.manifest.subcommand, self.manifest.run_id);
        self.manifest.artifacts.push(file.clone());
        self.root.join(file)
    }

    /// Writes flat rows as CSV with a header.
    pub fn csv<S: Serialize>(&mut self, name: &str, rows: &[S]) -> Result<PathBuf> {
        let path = self.artifact_path(name, "csv");
        let mut w = csv::Writer::from_path(&path).map_err(|e| Error::Io(e.to_string()))?;
        for r in rows {
            w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(path)
    }

    /// Writes a CSV table with an explicit header.
    pub fn table(&mut self, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<PathBuf> {
        let path = self.artifact_path(name, "csv");
        let mut w = csv::Writer::from_path(&path).map_err(|e| Error::Io(e.to_string()))?;
        w.write_record(header).map_err(|e| Error::Io(e.to_string()))?;
        for r in rows {
            w.write_record(r).map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(path)
    }

    /// Writes one JSON object per line.
    pub fn records<S: Serialize>(&mut self, name: &str, rows: &[S]) -> Result<PathBuf> {
        let path = self.artifact_path(name, "jsonl");
        let mut out = String::new();
        for r in rows {
            out.push_str(&serde_json::to_string(r).map_err(|e| Error::Io(e.to_string()))?);
            out.push('\n');
        }
        std::fs::write(&path, out)?;
        Ok(path)
    }

    /// Writes whitespace-separated columns for plotting.
    pub fn curve(&mut self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<PathBuf> {
        let path = self.artifact_path(name, "dat");
        let mut out = format!("# {}\n", header.join(" "));
        for r in rows {
            let line: Vec<String> = r.iter().map(|v| format!("{v:.17e}")).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        std::fs::write(&path, out)?;
        Ok(path)
    }

    /// Appends the manifest line and returns it.
    pub fn finish(mut self, exit_code: i32) -> Result<RunManifest> {
        self.manifest.wall_clock_seconds = self.clock.elapsed().as_secs_f64();
        self.manifest.exit_code = exit_code;
        let mut line = serde_json::to_string(&self.manifest).map_err(|e| Error::Io(e.to_string()))?;
        line.push('\n');
        let mut f = OpenOptions::new().create(true).append(true).open(self.root.join(MANIFEST_FILE))?;
        f.write_all(line.as_bytes())?;
        Ok(self.manifest)
    }
}
