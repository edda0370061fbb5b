//! Run manifests: the resolved configuration of a run plus hashes of its
//! inputs and outputs. `ctxrec rerun` replays a manifest and checks that every
//! output file comes out byte-identical.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{io_error, CliError};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractConfig {
    pub input: PathBuf,
    pub utc_offset_hours: Option<f64>,
    pub gzip: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluateConfig {
    pub features_dir: PathBuf,
    pub labels: Vec<String>,
    pub systems: Vec<String>,
    /// `cv5` or `loo`.
    pub mode: String,
    pub seed: u64,
    /// `None` selects C on the grid; LOO fixes it.
    pub fixed_cost: Option<f64>,
    pub partition: Vec<Vec<String>>,
    pub anchors: Option<String>,
    pub markdown: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonalizeConfig {
    pub features_dir: PathBuf,
    pub user: String,
    pub labels: Vec<String>,
    pub seed: u64,
    pub partition: Vec<Vec<String>>,
    pub anchors: Option<String>,
    pub markdown: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum RunConfig {
    Extract(ExtractConfig),
    Evaluate(EvaluateConfig),
    Personalize(PersonalizeConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostEntry {
    pub label: String,
    pub fold: usize,
    pub model: String,
    pub cost: f64,
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format_version: u32,
    pub tool_version: String,
    pub config: RunConfig,
    /// Hash over the input file names and contents.
    pub input_sha256: String,
    pub costs: Vec<CostEntry>,
    /// Output file name to SHA-256 of its content.
    pub outputs: BTreeMap<String, String>,
    pub elapsed_seconds: f64,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        let m: RunManifest =
            serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        if m.format_version != MANIFEST_VERSION {
            return Err(CliError::Config(format!("unsupported manifest version {}", m.format_version)));
        }
        Ok(m)
    }

    pub fn save(&self, dir: &Path) -> Result<(), CliError> {
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Internal(e.to_string()))?;
        fs::write(&path, text + "\n").map_err(|e| io_error(&path, e))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Every regular file under `root`, sorted by relative path.
fn files_under(root: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).map_err(|e| io_error(&dir, e))? {
            let path = entry.map_err(|e| io_error(&dir, e))?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(path);
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Hash over the relative names and contents of the selected files under `root`.
pub fn hash_tree(root: &Path, keep: impl Fn(&Path) -> bool) -> Result<String, CliError> {
    let mut h = Sha256::new();
    for path in files_under(root)?.into_iter().filter(|p| keep(p)) {
        let rel = path.strip_prefix(root).unwrap_or(&path).to_string_lossy().replace('\\', "/");
        let bytes = fs::read(&path).map_err(|e| io_error(&path, e))?;
        h.update(rel.as_bytes());
        h.update([0]);
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(&bytes);
    }
    Ok(hex::encode(h.finalize()))
}

/// Output files of a run, written to one directory and hashed as they go.
pub struct Outputs {
    dir: PathBuf,
    files: BTreeMap<String, String>,
}

impl Outputs {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: BTreeMap::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, content: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| io_error(parent, e))?;
        }
        fs::write(&path, content).map_err(|e| io_error(&path, e))?;
        self.files.insert(name.to_string(), sha256_hex(content));
        Ok(())
    }

    /// Records a file written by other means.
    pub fn record(&mut self, name: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let bytes = fs::read(&path).map_err(|e| io_error(&path, e))?;
        self.files.insert(name.to_string(), sha256_hex(&bytes));
        Ok(())
    }

    pub fn into_hashes(self) -> BTreeMap<String, String> {
        self.files
    }
}
