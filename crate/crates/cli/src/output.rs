//! Output files and run manifests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Collects written files for the manifest.
pub struct Outputs {
    started: Instant,
    written: Vec<(PathBuf, String)>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct FileDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct RunManifest<'a> {
    command: &'a str,
    config: &'a Value,
    seed: Option<u64>,
    tool_version: &'static str,
    threads: usize,
    started_unix_seconds: u64,
    wall_time_seconds: f64,
    outputs: Vec<FileDigest>,
}

impl Outputs {
    pub fn new() -> Self {
        Outputs {
            started: Instant::now(),
            written: Vec::new(),
        }
    }

    fn record(&mut self, path: &Path, bytes: &[u8]) {
        self.written.push((path.to_path_buf(), hex::encode(Sha256::digest(bytes))));
    }

    /// Writes `bytes` to `path`, or to stdout when `path` is `None`.
    pub fn emit(&mut self, path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
        match path {
            Some(p) => {
                if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
                }
                fs::write(p, bytes).map_err(|e| CliError::io(p, e))?;
                self.record(p, bytes);
            }
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(bytes).map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
            }
        }
        Ok(())
    }

    pub fn emit_json<T: Serialize>(&mut self, path: Option<&Path>, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
        text.push('\n');
        self.emit(path, text.as_bytes())
    }

    /// Writes the manifest next to the first output, or to `explicit`.
    pub fn finish(self, command: &str, config: &Value, seed: Option<u64>, explicit: Option<&Path>) -> Result<(), CliError> {
        let target = match (explicit, self.written.first()) {
            (Some(p), _) => p.to_path_buf(),
            (None, Some((first, _))) => manifest_path_for(first),
            (None, None) => return Ok(()),
        };
        let manifest = RunManifest {
            command,
            config,
            seed,
            tool_version: env!("CARGO_PKG_VERSION"),
            threads: rayon::current_num_threads(),
            started_unix_seconds: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
                .saturating_sub(self.started.elapsed().as_secs()),
            wall_time_seconds: self.started.elapsed().as_secs_f64(),
            outputs: self
                .written
                .iter()
                .map(|(p, d)| FileDigest {
                    path: p.display().to_string(),
                    sha256: d.clone(),
                })
                .collect(),
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Internal(e.to_string()))?;
        fs::write(&target, text + "\n").map_err(|e| CliError::io(&target, e))
    }
}

pub fn manifest_path_for(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    output.with_file_name(name)
}

/// CSV bytes from a header and rows.
pub fn csv_bytes(comment: Option<&str>, header: &[String], rows: &[Vec<String>]) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    if let Some(c) = comment {
        buf.extend_from_slice(b"# ");
        buf.extend_from_slice(c.as_bytes());
        buf.push(b'\n');
    }
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header).map_err(|e| CliError::Internal(e.to_string()))?;
        for r in rows {
            w.write_record(r).map_err(|e| CliError::Internal(e.to_string()))?;
        }
        w.flush().map_err(|e| CliError::Internal(e.to_string()))?;
    }
    Ok(buf)
}
