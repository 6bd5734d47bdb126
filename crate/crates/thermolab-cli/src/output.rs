//! Output files, number formatting and run manifests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliResult;

/// Float with 17 significant digits, enough to round-trip an `f64`.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// Hex SHA-256 of a byte string.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// A file written by a run and its checksum.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputEntry {
    /// File name relative to the run directory.
    pub file: String,
    /// Hex SHA-256 of the contents.
    pub sha256: String,
}

/// Output files of one run, held in memory until the run succeeds.
pub struct OutputSet {
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

impl OutputSet {
    /// Empty set destined for `dir`.
    pub fn new(dir: &Path) -> Self {
        Self { dir: dir.to_path_buf(), files: Vec::new() }
    }

    /// Run directory.
    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Stages raw bytes.
    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        self.files.push((name.into(), bytes.to_vec()));
        Ok(())
    }

    /// Stages a CSV table with a header row.
    pub fn write_csv(&mut self, name: &str, header: &[String], rows: &[Vec<String>]) -> CliResult<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| crate::error::CliError::Io(e.to_string()))?;
        self.write_bytes(name, &bytes)
    }

    /// Stages pretty-printed JSON.
    pub fn write_json<S: Serialize>(&mut self, name: &str, value: &S) -> CliResult<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write_bytes(name, &bytes)
    }

    /// Staged file names in write order.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|f| f.0.as_str())
    }

    /// Creates the directory, writes every file and returns the checksums.
    pub fn commit(self) -> CliResult<Vec<OutputEntry>> {
        fs::create_dir_all(&self.dir)?;
        let mut entries = Vec::with_capacity(self.files.len());
        for (name, bytes) in &self.files {
            fs::write(self.dir.join(name), bytes)?;
            entries.push(OutputEntry { file: name.clone(), sha256: sha256_hex(bytes) });
        }
        Ok(entries)
    }
}

/// File names reserved for run bookkeeping.
pub const CONFIG_FILE: &str = "config.json";
/// Manifest file name.
pub const MANIFEST_FILE: &str = "manifest.json";

/// Everything needed to reproduce and verify a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    /// Program name.
    pub tool: String,
    /// Program version.
    pub version: String,
    /// Subcommand.
    pub subcommand: String,
    /// Master seed.
    pub seed: u64,
    /// Effective configuration.
    pub config: Value,
    /// Start time, RFC 3339.
    pub started: String,
    /// End time, RFC 3339.
    pub finished: String,
    /// Snapshot of the effective configuration on disk.
    pub config_file: OutputEntry,
    /// Data outputs.
    pub outputs: Vec<OutputEntry>,
}

impl RunManifest {
    /// Reads a manifest from disk.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)?;
        serde_path_to_error::deserialize(&mut serde_json::Deserializer::from_str(&text))
            .map_err(|e| crate::error::CliError::Schema(format!("manifest {}: {}", e.path(), e.inner())))
    }
}
