//! CSV and JSON output with a checksummed manifest.
//!
//! Nothing time-dependent is written unless `record_timing` is set, so two
//! runs of the same config produce byte-identical directories.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, OutputFormat};
use super::experiments::ExperimentOutput;
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub crate_version: String,
    /// The config as TOML, after defaults.
    pub config: String,
    pub config_sha256: String,
    pub files: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

/// The CSV body for an output.
pub fn to_csv(out: &ExperimentOutput) -> Result<Vec<u8>> {
    match out {
        ExperimentOutput::Rate(s) => csv_bytes(&s.rows),
        ExperimentOutput::Kernel { rows } => csv_bytes(rows),
        ExperimentOutput::Sharp { rows } => csv_bytes(rows),
        ExperimentOutput::Skew { rows, .. } => csv_bytes(rows),
        ExperimentOutput::Approx { rows, .. } => csv_bytes(rows),
    }
}

/// Write `<label>.csv` and/or `<label>.json` plus `<label>.manifest.json`
/// into `dir`, returning the manifest.
pub fn write_outputs(cfg: &ExperimentConfig, out: &ExperimentOutput, dir: &Path) -> Result<Manifest> {
    fs::create_dir_all(dir)?;
    let label = cfg.label();
    let mut files = Vec::new();
    let mut put = |name: String, bytes: Vec<u8>| -> Result<()> {
        fs::write(dir.join(&name), &bytes)?;
        files.push(FileEntry {
            sha256: sha256_hex(&bytes),
            bytes: bytes.len() as u64,
            name,
        });
        Ok(())
    };
    if matches!(cfg.format, OutputFormat::Csv | OutputFormat::Both) {
        put(format!("{label}.csv"), to_csv(out)?)?;
    }
    if matches!(cfg.format, OutputFormat::Json | OutputFormat::Both) {
        let mut body = serde_json::to_vec_pretty(out)?;
        body.push(b'\n');
        put(format!("{label}.json"), body)?;
    }
    let config = cfg.to_toml();
    let manifest = Manifest {
        name: label.clone(),
        crate_version: env!("CARGO_PKG_VERSION").into(),
        config_sha256: sha256_hex(config.as_bytes()),
        config,
        files,
    };
    let mut body = serde_json::to_vec_pretty(&manifest)?;
    body.push(b'\n');
    fs::write(dir.join(format!("{label}.manifest.json")), body)?;
    Ok(manifest)
}

/// Output directory: the config's `out_dir`, else `out`.
pub fn out_dir(cfg: &ExperimentConfig, override_dir: Option<&Path>) -> PathBuf {
    override_dir
        .map(Path::to_path_buf)
        .or_else(|| cfg.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha_of_empty_string() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
