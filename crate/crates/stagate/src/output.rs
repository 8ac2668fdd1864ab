//! File emission with content hashes for the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// CSV number format: 12 significant digits.
pub fn fmt_csv(x: f64) -> String {
    format!("{x:.11e}")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Output directory that remembers every file written through it.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    files: Vec<FileRecord>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl OutputDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self, CliError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| CliError::io(&root, e))?;
        Ok(Self { root, files: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn files(&self) -> &[FileRecord] {
        &self.files
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.root.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.files.push(FileRecord {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &Value) -> Result<(), CliError> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Write {
            path: self.root.join(name),
            message: e.to_string(),
        })?;
        bytes.push(b'\n');
        self.write_bytes(name, &bytes)
    }

    pub fn write_csv<I, R>(&mut self, name: &str, header: &[&str], rows: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = String>,
    {
        let err = |e: csv::Error| CliError::Write {
            path: self.root.join(name),
            message: e.to_string(),
        };
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).map_err(err)?;
        for row in rows {
            w.write_record(row.into_iter().collect::<Vec<_>>()).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Write {
            path: self.root.join(name),
            message: e.to_string(),
        })?;
        self.write_bytes(name, &bytes)
    }

    /// Write `manifest.json` listing every file emitted so far. The manifest
    /// itself carries timestamps and is not listed.
    pub fn write_manifest(&self, manifest: &Value) -> Result<PathBuf, CliError> {
        let path = self.root.join("manifest.json");
        let mut bytes = serde_json::to_vec_pretty(manifest).map_err(|e| CliError::Write {
            path: path.clone(),
            message: e.to_string(),
        })?;
        bytes.push(b'\n');
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_precision() {
        assert_eq!(fmt_csv(1.0), "1.00000000000e0");
        assert_eq!(fmt_csv(-0.125), "-1.25000000000e-1");
        let x = 0.123_456_789_012_345;
        assert!((fmt_csv(x).parse::<f64>().unwrap() - x).abs() < 1e-12);
    }

    #[test]
    fn records_hashes() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path().join("o")).unwrap();
        out.write_bytes("a.txt", b"abc").unwrap();
        assert_eq!(
            out.files()[0].sha256,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        assert_eq!(out.files()[0].bytes, 3);
    }
}
