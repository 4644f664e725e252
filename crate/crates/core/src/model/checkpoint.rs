use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ModelConfig;
use super::sno::{init_model, SnoModel};
use crate::datagen::NormStats;
use crate::nn::{read_archive, write_archive};
use crate::{Error, Result};

/// Sidecar format version; readers accept any minor of the same major.
pub const SIDECAR_VERSION: &str = "1.0";

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    format_version: String,
    archive: String,
    config: ModelConfig,
    input_stats: Option<NormStats>,
}

/// `model.snot` -> `model.snot.toml`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".toml");
    PathBuf::from(s)
}

pub(crate) fn check_major(found: &str, supported: &str) -> Result<()> {
    let major = |v: &str| v.split('.').next().unwrap_or("").to_owned();
    if major(found) != major(supported) {
        return Err(Error::Format(format!("format version {found}, reader supports {supported}")));
    }
    Ok(())
}

/// Write the parameter archive to `path` and the config sidecar next to it.
pub fn save_checkpoint(model: &SnoModel, path: &Path) -> Result<()> {
    let bytes = write_archive(model.params.iter());
    fs::write(path, bytes)?;
    let sidecar = Sidecar {
        format_version: SIDECAR_VERSION.into(),
        archive: path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
        config: model.config.clone(),
        input_stats: model.input_stats.clone(),
    };
    let text = toml::to_string(&sidecar).map_err(|e| Error::Format(e.to_string()))?;
    fs::write(sidecar_path(path), text)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<SnoModel> {
    let text = fs::read_to_string(sidecar_path(path))?;
    let sidecar: Sidecar = toml::from_str(&text).map_err(|e| Error::Format(format!("checkpoint sidecar: {e}")))?;
    check_major(&sidecar.format_version, SIDECAR_VERSION)?;
    let entries = read_archive(&fs::read(path)?)?;
    let mut model = init_model(sidecar.config)?;
    model.params.load_values(entries)?;
    model.input_stats = sidecar.input_stats;
    Ok(model)
}
