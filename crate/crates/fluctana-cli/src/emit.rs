//! Artifact writers. Every file carries the tool version and config hash
//! so runs are traceable; float formatting uses Rust's shortest
//! round-trip representation, which keeps reruns byte-identical.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::TOOL_VERSION;

/// JSON report wrapper adding provenance fields around the payload.
#[derive(Serialize)]
pub struct Envelope<T: Serialize> {
    pub tool_version: &'static str,
    pub config_sha256: String,
    pub report: T,
}

pub struct Emitter {
    dir: PathBuf,
    digest: String,
}

impl Emitter {
    pub fn new(dir: &Path, digest: &str) -> Result<Self, String> {
        fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            digest: digest.to_string(),
        })
    }

    fn header(&self) -> String {
        format!("# fluctana {TOOL_VERSION}\n# config sha256 {}\n", self.digest)
    }

    /// Write a CSV table: metadata comment lines, one header row, then the
    /// data rows produced by `rows`.
    pub fn csv<I>(&self, name: &str, columns: &str, rows: I) -> Result<PathBuf, String>
    where
        I: IntoIterator<Item = String>,
    {
        let path = self.dir.join(name);
        let mut buf = self.header();
        if !columns.is_empty() {
            buf.push_str(columns);
            buf.push('\n');
        }
        for row in rows {
            buf.push_str(&row);
            buf.push('\n');
        }
        write_atomic(&path, buf.as_bytes())?;
        Ok(path)
    }

    pub fn json<T: Serialize>(&self, name: &str, report: T) -> Result<PathBuf, String> {
        let path = self.dir.join(name);
        let env = Envelope {
            tool_version: TOOL_VERSION,
            config_sha256: self.digest.clone(),
            report,
        };
        let mut text = serde_json::to_string_pretty(&env)
            .map_err(|e| format!("serialize {name}: {e}"))?;
        text.push('\n');
        write_atomic(&path, text.as_bytes())?;
        Ok(path)
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), String> {
    let mut f =
        fs::File::create(path).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    f.write_all(bytes)
        .map_err(|e| format!("write {}: {e}", path.display()))
}

/// Join floats into one CSV row using the shortest round-trip form.
pub fn row(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}
