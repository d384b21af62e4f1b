//! Output directories with a hashed manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::curve::CurveSnapshot;
use crate::integrator::Trajectory;

pub const MANIFEST_NAME: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    /// File name → sha256 of its contents.
    pub outputs: BTreeMap<String, String>,
}

/// A directory whose files are all recorded in `manifest.json`.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    outputs: BTreeMap<String, String>,
}

impl OutputDir {
    pub fn create(root: impl AsRef<Path>) -> io::Result<Self> {
        let root = root.as_ref().to_path_buf();
        fs::create_dir_all(&root)?;
        Ok(Self {
            root,
            outputs: BTreeMap::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> io::Result<()> {
        fs::write(self.root.join(name), bytes)?;
        self.outputs.insert(name.to_owned(), sha256_hex(bytes));
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> io::Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn finish(self, command: &str, config: serde_json::Value) -> io::Result<Manifest> {
        let manifest = Manifest {
            tool: "peskin".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config,
            outputs: self.outputs,
        };
        let mut text = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?;
        text.push('\n');
        fs::write(self.root.join(MANIFEST_NAME), text)?;
        Ok(manifest)
    }
}

pub fn snapshot_name(index: usize) -> String {
    format!("snapshot_{index:05}.json")
}

/// `snapshot_NNNNN.json` per snapshot plus `diagnostics.csv`.
pub fn write_trajectory(dir: &mut OutputDir, traj: &Trajectory) -> io::Result<()> {
    for (i, snap) in traj.snapshots.iter().enumerate() {
        dir.write_json(&snapshot_name(i), &CurveSnapshot::from(snap))?;
    }
    dir.write("diagnostics.csv", traj.diagnostics_csv().as_bytes())
}
