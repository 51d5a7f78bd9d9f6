//! Artifact files and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use rbmlab_core::export::fmt_f64;
use rbmlab_core::stats::{write_report_csv, ReportRow};

use crate::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct ArtifactRecord {
    pub file: String,
    /// Data rows, header excluded (0 for JSON files).
    pub rows: usize,
    pub sha256: String,
}

/// Collects the files written by one run.
#[derive(Debug)]
pub struct Artifacts {
    dir: PathBuf,
    records: Vec<ArtifactRecord>,
}

pub fn hex_sha256(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            records: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn records(&self) -> &[ArtifactRecord] {
        &self.records
    }

    fn store(&mut self, name: &str, bytes: &[u8], rows: usize) -> Result<(), CliError> {
        fs::write(self.dir.join(name), bytes)?;
        self.records.retain(|r| r.file != name);
        self.records.push(ArtifactRecord {
            file: name.to_string(),
            rows,
            sha256: hex_sha256(bytes),
        });
        Ok(())
    }

    /// Writes a CSV produced by `fill`; rows are counted from the line breaks.
    pub fn csv(
        &mut self,
        name: &str,
        fill: impl FnOnce(&mut Vec<u8>) -> Result<(), CliError>,
    ) -> Result<(), CliError> {
        let mut buf = Vec::new();
        fill(&mut buf)?;
        let lines = buf.iter().filter(|&&c| c == b'\n').count();
        self.store(name, &buf, lines.saturating_sub(1))
    }

    /// Writes a CSV from a header and pre-rendered rows.
    pub fn table(&mut self, name: &str, header: &str, rows: &[Vec<String>]) -> Result<(), CliError> {
        self.csv(name, |buf| {
            buf.extend_from_slice(header.as_bytes());
            buf.push(b'\n');
            for row in rows {
                buf.extend_from_slice(row.join(",").as_bytes());
                buf.push(b'\n');
            }
            Ok(())
        })
    }

    pub fn report(&mut self, rows: &[ReportRow]) -> Result<(), CliError> {
        self.csv("report.csv", |buf| Ok(write_report_csv(rows, buf)?))
    }

    pub fn json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Schema(format!("cannot serialise {name}: {e}")))?;
        text.push('\n');
        self.store(name, text.as_bytes(), 0)
    }
}

#[derive(Debug, Serialize)]
pub struct Seeds {
    pub noise_seed: u64,
    pub env_seed: u64,
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub core_version: &'static str,
    pub experiment: &'a str,
    pub config_sha256: String,
    pub config: &'a serde_json::Value,
    pub seeds: Seeds,
    pub artifacts: &'a [ArtifactRecord],
    pub status: &'static str,
    pub diagnostics: serde_json::Value,
}

pub fn write_manifest(dir: &Path, manifest: &Manifest<'_>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(manifest)
        .map_err(|e| CliError::Schema(format!("cannot serialise manifest: {e}")))?;
    text.push('\n');
    fs::write(dir.join("manifest.json"), text)?;
    Ok(())
}

/// Renders a float for CSV output.
pub fn num(x: f64) -> String {
    fmt_f64(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(
            hex_sha256(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn rows_exclude_header() {
        let dir = tempfile::tempdir().unwrap();
        let mut art = Artifacts::create(dir.path()).unwrap();
        art.table("x.csv", "a,b", &[vec!["1".into(), "2".into()]]).unwrap();
        assert_eq!(art.records()[0].rows, 1);
        assert_eq!(fs::read_to_string(dir.path().join("x.csv")).unwrap(), "a,b\n1,2\n");
    }
}
