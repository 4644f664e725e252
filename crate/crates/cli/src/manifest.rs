//! Run manifests: what was run, with which inputs, written before the work
//! starts.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct InputHash {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    /// Full argument vector, program name excluded.
    pub args: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub out: String,
    pub inputs: Vec<InputHash>,
    /// Effective configuration after defaults and flag overrides.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolved: Option<toml::Table>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn hash_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(sha256_hex(&bytes))
}

impl RunManifest {
    pub fn new(command: &str, out: &Path) -> Self {
        Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            args: std::env::args().skip(1).collect(),
            config: None,
            seed: None,
            out: out.display().to_string(),
            inputs: Vec::new(),
            resolved: None,
        }
    }

    /// Record an input file and its hash.
    pub fn input(&mut self, role: &str, path: &Path) -> Result<()> {
        let sha256 = hash_file(path)?;
        self.inputs.push(InputHash { role: role.into(), path: path.display().to_string(), sha256 });
        Ok(())
    }

    pub fn resolved<T: Serialize>(&mut self, value: &T) -> Result<()> {
        self.resolved = Some(toml::Table::try_from(value).context("serializing the resolved configuration")?);
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = toml::to_string(self).context("serializing the run manifest")?;
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }
}

/// Manifest location for a run writing into directory `dir`.
pub fn in_dir(dir: &Path) -> PathBuf {
    dir.join("manifest.toml")
}

/// Manifest location for a run producing the single file `file`.
pub fn beside(file: &Path) -> PathBuf {
    let mut s = file.as_os_str().to_owned();
    s.push(".manifest.toml");
    PathBuf::from(s)
}
