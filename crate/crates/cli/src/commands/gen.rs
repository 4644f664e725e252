use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use sno_core::datagen::{build_dataset, write_dataset, TaskSpec};

use super::read_config;
use crate::manifest::{self, RunManifest};
use crate::GenArgs;

pub fn gen(args: GenArgs) -> Result<()> {
    let mut spec: TaskSpec = toml::from_str(&read_config(&args.config)?)
        .with_context(|| format!("parsing task spec {}", args.config.display()))?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(n) = args.resolution {
        spec.resolution = n;
    }
    spec.validate()?;

    let mut m = RunManifest::new("gen", &args.out);
    m.config = Some(args.config.display().to_string());
    m.seed = Some(spec.seed);
    m.input("spec", &args.config)?;
    m.resolved(&spec)?;
    m.write(&manifest::beside(&args.out))?;

    let ds = build_dataset(&spec).with_context(|| format!("generating the {} dataset", spec.task.name()))?;
    // Write next to the target and rename, so a failure never leaves a
    // truncated dataset under the requested name.
    let mut tmp = args.out.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    let written = write_dataset(&ds, &tmp)
        .map_err(anyhow::Error::from)
        .and_then(|()| fs::rename(&tmp, &args.out).context("moving the dataset into place"));
    if let Err(e) = written {
        let _ = fs::remove_file(&tmp);
        return Err(e.context(format!("writing {}", args.out.display())));
    }
    eprintln!(
        "wrote {} samples of {} to {} (inputs {:?}, outputs {:?})",
        ds.len(),
        spec.task.name(),
        args.out.display(),
        ds.inputs.shape(),
        ds.outputs.shape()
    );
    Ok(())
}
