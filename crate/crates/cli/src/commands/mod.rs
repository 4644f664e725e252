//! One function per subcommand. Each validates its inputs, writes a run
//! manifest, then does the work.

mod bench;
mod eval;
mod gen;
mod train;
mod transform;

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};

pub use bench::bench;
pub use eval::{eval, superres};
pub use gen::gen;
pub use train::train;
pub use transform::transform;

use crate::exit::usage;

/// Config files that cannot be read are configuration errors, not I/O ones.
fn read_config(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

/// Flat little-endian `f64` payload.
fn write_f64s(path: &Path, values: &[f64]) -> Result<()> {
    let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
    write(path, bytes)
}
