use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sno_core::datagen::{read_dataset, TaskDataset};
use sno_core::model::init_model;
use sno_core::trainer::{train_with, TrainConfig};
use sno_core::Error;

use super::{create_dir, read_config, write};
use crate::exit::usage;
use crate::manifest::{self, RunManifest};
use crate::TrainArgs;

/// Parsed run config: the dataset path plus [`TrainConfig`] fields at top
/// level. Channel counts given explicitly under `[model]` are checked
/// against the dataset; otherwise they are taken from it.
struct RunConfig {
    dataset: PathBuf,
    train: TrainConfig,
    in_channels: Option<usize>,
    out_channels: Option<usize>,
}

fn parse_run_config(path: &Path) -> Result<RunConfig> {
    let mut table: toml::Table = read_config(path)?
        .parse()
        .with_context(|| format!("parsing run config {}", path.display()))?;
    let dataset = match table.remove("dataset") {
        Some(toml::Value::String(s)) => s,
        Some(_) => return Err(usage("`dataset` must be a string path")),
        None => return Err(usage(format!("{} does not name a `dataset`", path.display()))),
    };
    // relative dataset paths are relative to the config file
    let dataset = path.parent().unwrap_or(Path::new("")).join(dataset);
    let explicit = |key: &str| {
        table
            .get("model")
            .and_then(|m| m.get(key))
            .and_then(toml::Value::as_integer)
            .map(|v| v as usize)
    };
    let (in_channels, out_channels) = (explicit("in_channels"), explicit("out_channels"));
    let train: TrainConfig = toml::Value::Table(table)
        .try_into()
        .with_context(|| format!("parsing run config {}", path.display()))?;
    Ok(RunConfig { dataset, train, in_channels, out_channels })
}

fn fit_channels(cfg: &mut RunConfig, data: &TaskDataset) -> Result<()> {
    let (have_in, have_out) = (data.inputs.shape()[1], data.outputs.shape()[1]);
    for (name, explicit, have) in [("in_channels", cfg.in_channels, have_in), ("out_channels", cfg.out_channels, have_out)] {
        if let Some(n) = explicit.filter(|&n| n != have) {
            return Err(Error::ShapeMismatch(format!("config sets model.{name} = {n}, dataset has {have}")).into());
        }
    }
    cfg.train.model.in_channels = have_in;
    cfg.train.model.out_channels = have_out;
    Ok(())
}

pub fn train(args: TrainArgs) -> Result<()> {
    let mut cfg = parse_run_config(&args.config)?;
    let t = &mut cfg.train;
    if let Some(seed) = args.seed {
        t.seed = seed;
        t.model.seed = seed;
    }
    if let Some(e) = args.epochs {
        t.epochs = e;
    }
    if let Some(b) = args.batch_size {
        t.batch_size = b;
    }
    if let Some(lr) = args.lr {
        t.lr = lr;
    }
    if let Some(d) = args.degree {
        t.model.degree = d;
    }
    t.validate()?;

    let mut data = read_dataset(&cfg.dataset).with_context(|| format!("reading {}", cfg.dataset.display()))?;
    fit_channels(&mut cfg, &data)?;
    let mut config = cfg.train;
    config.task.get_or_insert_with(|| data.spec.task.name().to_owned());

    create_dir(&args.out)?;
    let mut m = RunManifest::new("train", &args.out);
    m.config = Some(args.config.display().to_string());
    m.seed = Some(config.seed);
    m.input("config", &args.config)?;
    m.input("dataset", &cfg.dataset)?;
    m.resolved(&config)?;
    m.write(&manifest::in_dir(&args.out))?;

    if !data.is_normalized() {
        data.normalize()?;
    }
    let mut model = init_model(config.model.clone())?;
    let ckpt = args.out.join("model.ckpt");
    let epochs = config.epochs;
    let report = train_with(&mut model, &data, &config, Some(&ckpt), |e, r| {
        eprintln!(
            "epoch {e}/{epochs}  train {:.4e}  test {:.4e}  ({:.2}s)",
            r.train_loss[e - 1],
            r.test_rel_l2[e - 1],
            r.seconds[e - 1]
        );
    })?;
    write(&args.out.join("train.csv"), report.to_csv())?;
    let last = report.epochs() - 1;
    let summary = format!(
        "epochs = {}\nsteps = {}\nparameters = {}\nfinal_train_loss = {:e}\nfinal_test_rel_l2 = {:e}\nseconds = {:.3}\ncheckpoint = \"model.ckpt\"\n",
        report.epochs(),
        report.steps,
        config.model.parameter_count(),
        report.train_loss[last],
        report.test_rel_l2[last],
        report.seconds.iter().sum::<f64>()
    );
    write(&args.out.join("summary.toml"), summary)?;
    eprintln!("wrote {}", args.out.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_config_fields_and_relative_dataset() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.toml");
        std::fs::write(&p, "dataset = \"d.snod\"\nepochs = 7\n[model]\nwidth = 8\nout_channels = 3\n").unwrap();
        let c = parse_run_config(&p).unwrap();
        assert_eq!(c.dataset, dir.path().join("d.snod"));
        assert_eq!(c.train.epochs, 7);
        assert_eq!(c.train.model.width, 8);
        assert_eq!(c.train.model.degree, 16);
        assert_eq!((c.in_channels, c.out_channels), (None, Some(3)));
    }

    #[test]
    fn unknown_keys_and_missing_dataset_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.toml");
        std::fs::write(&p, "dataset = \"d\"\nepoch = 7\n").unwrap();
        assert_eq!(crate::exit::code_for(&parse_run_config(&p).err().unwrap()), crate::exit::CONFIG);
        std::fs::write(&p, "epochs = 7\n").unwrap();
        assert_eq!(crate::exit::code_for(&parse_run_config(&p).err().unwrap()), crate::exit::CONFIG);
    }
}
