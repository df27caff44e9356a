// Copyright 2026 The paramp Authors
// SPDX-License-Identifier: Apache-2.0

//! Artifact writing: CSV tables, field matrices and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{ParampError, Result};
use crate::fluctuations::Field2D;

/// Number formatting shared by every table: shortest round-trip exponent form.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

pub struct OutputDir {
    root: PathBuf,
    files: Vec<(String, String)>,
}

#[derive(Serialize)]
struct FileEntry<'a> {
    name: &'a str,
    sha256: &'a str,
}

#[derive(Serialize)]
struct Manifest<'a> {
    paramp_version: &'a str,
    task: &'a str,
    config_sha256: &'a str,
    seed: u64,
    results: &'a BTreeMap<String, f64>,
    files: Vec<FileEntry<'a>>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| ParampError::Io(format!("{}: {e}", root.display())))?;
        Ok(Self { root: root.to_path_buf(), files: Vec::new() })
    }

    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(name);
        fs::write(&path, bytes).map_err(|e| ParampError::Io(format!("{}: {e}", path.display())))?;
        self.files.push((name.to_string(), hex::encode(Sha256::digest(bytes))));
        Ok(())
    }

    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            debug_assert_eq!(r.len(), header.len());
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| ParampError::Io(e.to_string()))?;
        self.put(name, &bytes)
    }

    pub fn write_field(&mut self, name: &str, field: &Field2D, title: &str) -> Result<()> {
        let mut bytes = Vec::new();
        field.write_matrix(&mut bytes, title)?;
        self.put(name, &bytes)
    }

    pub fn write_manifest(
        &mut self,
        task: &str,
        config_hash: &str,
        seed: u64,
        results: &BTreeMap<String, f64>,
    ) -> Result<()> {
        let manifest = Manifest {
            paramp_version: env!("CARGO_PKG_VERSION"),
            task,
            config_sha256: config_hash,
            seed,
            results,
            files: self.files.iter().map(|(name, sha256)| FileEntry { name, sha256 }).collect(),
        };
        let text = toml::to_string(&manifest).map_err(|e| ParampError::Io(e.to_string()))?;
        let path = self.root.join("manifest.toml");
        fs::write(&path, text).map_err(|e| ParampError::Io(format!("{}: {e}", path.display())))
    }
}
