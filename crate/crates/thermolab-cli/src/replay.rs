//! Re-execution of a recorded run and comparison against its checksums.

use std::fmt;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::config::{parse, EffectiveConfig};
use crate::error::{CliError, CliResult};
use crate::output::{sha256_hex, RunManifest};
use crate::{run_config, VERSION};

/// Relative tolerance on numeric fields after a version change.
pub const REPLAY_RTOL: f64 = 1e-10;

/// Outcome for one output file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FileStatus {
    /// Checksums agree.
    Identical,
    /// Checksums differ but every numeric field agrees within tolerance.
    WithinTolerance,
    /// Contents differ.
    Differs(String),
    /// Present in the manifest but not produced, or the reverse.
    Missing,
}

/// Comparison of a replay against its manifest.
#[derive(Clone, Debug)]
pub struct ReplayReport {
    /// Directory of the replayed outputs.
    pub dir: PathBuf,
    /// Whether the recorded version differs from this build.
    pub version_mismatch: Option<String>,
    /// Per-file outcome, manifest order then extras.
    pub files: Vec<(String, FileStatus)>,
}

impl ReplayReport {
    /// Whether every file agrees.
    pub fn ok(&self) -> bool {
        self.files.iter().all(|(_, s)| matches!(s, FileStatus::Identical | FileStatus::WithinTolerance))
    }

    /// `Ok` when every file agrees, otherwise a mismatch error.
    pub fn into_result(self) -> CliResult<()> {
        if self.ok() {
            return Ok(());
        }
        let bad: Vec<&str> = self.files.iter().filter(|(_, s)| !matches!(s, FileStatus::Identical | FileStatus::WithinTolerance)).map(|(f, _)| f.as_str()).collect();
        Err(CliError::Mismatch(bad.join(", ")))
    }
}

impl fmt::Display for ReplayReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(v) = &self.version_mismatch {
            writeln!(f, "warning: manifest written by version {v}, replaying with {VERSION}; comparing at relative tolerance {REPLAY_RTOL:e}")?;
        }
        for (file, s) in &self.files {
            match s {
                FileStatus::Identical => writeln!(f, "identical  {file}")?,
                FileStatus::WithinTolerance => writeln!(f, "tolerance  {file}")?,
                FileStatus::Differs(why) => writeln!(f, "MISMATCH   {file}: {why}")?,
                FileStatus::Missing => writeln!(f, "MISSING    {file}")?,
            }
        }
        write!(f, "replay {} ({})", if self.ok() { "ok" } else { "failed" }, self.dir.display())
    }
}

/// Re-executes the run recorded in `manifest_path`.
///
/// Outputs go to `out`, or to a fresh directory beside the manifest. `seed`
/// and `workers` override the recorded values.
pub fn replay(manifest_path: &Path, seed: Option<u64>, workers: Option<usize>, out: Option<&Path>) -> CliResult<ReplayReport> {
    let manifest = RunManifest::load(manifest_path)?;
    let mut cfg: EffectiveConfig = parse(manifest.config.clone(), "config")?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if workers.is_some() {
        cfg.workers = workers;
    }
    let src_dir = manifest_path.parent().unwrap_or(Path::new("."));
    let dir = match out {
        Some(d) => d.to_path_buf(),
        None => tempfile::Builder::new().prefix("replay-").tempdir_in(src_dir)?.keep(),
    };
    if dir == src_dir {
        return Err(CliError::Schema("out: replay directory must differ from the recorded run".into()));
    }
    let fresh = run_config(&cfg, &dir)?;
    let version_mismatch = (manifest.version != VERSION).then(|| manifest.version.clone());
    let mut files = Vec::new();
    for e in &manifest.outputs {
        let status = match fresh.outputs.iter().find(|n| n.file == e.file) {
            None => FileStatus::Missing,
            Some(n) if n.sha256 == e.sha256 => FileStatus::Identical,
            Some(_) if version_mismatch.is_some() => compare_files(&src_dir.join(&e.file), &e.sha256, &dir.join(&e.file))?,
            Some(_) => FileStatus::Differs("checksum".into()),
        };
        files.push((e.file.clone(), status));
    }
    for n in &fresh.outputs {
        if !manifest.outputs.iter().any(|e| e.file == n.file) {
            files.push((n.file.clone(), FileStatus::Missing));
        }
    }
    Ok(ReplayReport { dir, version_mismatch, files })
}

fn compare_files(old: &Path, sha: &str, new: &Path) -> CliResult<FileStatus> {
    let a = std::fs::read(old)?;
    if sha256_hex(&a) != sha {
        return Ok(FileStatus::Differs("recorded file does not match its checksum".into()));
    }
    let b = std::fs::read(new)?;
    let verdict = if old.extension().is_some_and(|e| e == "json") {
        let (va, vb): (Value, Value) = (serde_json::from_slice(&a)?, serde_json::from_slice(&b)?);
        json_close(&va, &vb, "")
    } else {
        csv_close(&a, &b)?
    };
    Ok(match verdict {
        None => FileStatus::WithinTolerance,
        Some(why) => FileStatus::Differs(why),
    })
}

/// Whether two numbers agree to the replay tolerance.
pub fn close(a: f64, b: f64) -> bool {
    a == b || (a.is_nan() && b.is_nan()) || (a - b).abs() <= REPLAY_RTOL * a.abs().max(b.abs())
}

fn cell_close(a: &str, b: &str) -> bool {
    match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) => close(x, y),
        _ => a == b,
    }
}

fn csv_close(a: &[u8], b: &[u8]) -> CliResult<Option<String>> {
    let read = |bytes: &[u8]| -> CliResult<Vec<csv::StringRecord>> {
        Ok(csv::ReaderBuilder::new().has_headers(false).from_reader(bytes).records().collect::<Result<_, _>>()?)
    };
    let (ra, rb) = (read(a)?, read(b)?);
    if ra.len() != rb.len() {
        return Ok(Some(format!("{} rows against {}", ra.len(), rb.len())));
    }
    for (i, (x, y)) in ra.iter().zip(&rb).enumerate() {
        if x.len() != y.len() {
            return Ok(Some(format!("row {i} has {} fields against {}", x.len(), y.len())));
        }
        if let Some(j) = x.iter().zip(y.iter()).position(|(p, q)| !cell_close(p, q)) {
            return Ok(Some(format!("row {i}, column {j}: {} against {}", &x[j], &y[j])));
        }
    }
    Ok(None)
}

fn json_close(a: &Value, b: &Value, path: &str) -> Option<String> {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap_or(f64::NAN), y.as_f64().unwrap_or(f64::NAN));
            (!close(x, y)).then(|| format!("{path}: {x} against {y}"))
        }
        (Value::String(x), Value::String(y)) => (!cell_close(x, y)).then(|| format!("{path}: {x:?} against {y:?}")),
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                return Some(format!("{path}: lengths {} and {}", x.len(), y.len()));
            }
            x.iter().zip(y).enumerate().find_map(|(i, (p, q))| json_close(p, q, &format!("{path}[{i}]")))
        }
        (Value::Object(x), Value::Object(y)) => {
            if x.len() != y.len() || x.keys().any(|k| !y.contains_key(k)) {
                return Some(format!("{path}: different keys"));
            }
            x.iter().find_map(|(k, v)| json_close(v, &y[k], &format!("{path}.{k}")))
        }
        _ => (a != b).then(|| format!("{path}: {a} against {b}")),
    }
}
