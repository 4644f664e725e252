use std::path::Path;

use anyhow::{Context, Result};
use sno_core::datagen::{read_dataset, TaskDataset};
use sno_core::evalbench::{evaluate, superres_eval};
use sno_core::model::{load_checkpoint, SnoModel};
use sno_core::Error;

use super::{create_dir, write, write_f64s};
use crate::manifest::{self, RunManifest};
use crate::{EvalArgs, SuperresArgs};

fn load(model: &Path, data: &Path) -> Result<(SnoModel, TaskDataset)> {
    let m = load_checkpoint(model).with_context(|| format!("loading checkpoint {}", model.display()))?;
    let d = read_dataset(data).with_context(|| format!("reading {}", data.display()))?;
    let (cin, cout) = (d.inputs.shape()[1], d.outputs.shape()[1]);
    if m.config.in_channels != cin || m.config.out_channels != cout {
        return Err(Error::ShapeMismatch(format!(
            "model maps {} -> {} channels, dataset has {cin} input and {cout} output channels",
            m.config.in_channels, m.config.out_channels
        ))
        .into());
    }
    Ok((m, d))
}

fn start(command: &str, model: &Path, data: &Path, out: &Path) -> Result<()> {
    create_dir(out)?;
    let mut m = RunManifest::new(command, out);
    m.input("model", model)?;
    m.input("model_sidecar", &sno_core::model::sidecar_path(model))?;
    m.input("dataset", data)?;
    m.write(&manifest::in_dir(out))
}

pub fn eval(args: EvalArgs) -> Result<()> {
    let (model, data) = load(&args.model, &args.data)?;
    start("eval", &args.model, &args.data, &args.out)?;
    let report = evaluate(&model, &data)?;
    let n = data.grid.len();
    let c = data.outputs.shape()[1];
    write(&args.out.join("eval.csv"), report.to_csv(&data.test_indices()))?;
    write_f64s(&args.out.join("worst_error.f64"), &report.worst.1)?;
    write_f64s(&args.out.join("median_error.f64"), &report.median_sample.1)?;
    let summary = format!(
        "{}error_field_shape = [{c}, {n}]\nworst_error_file = \"worst_error.f64\"\nmedian_error_file = \"median_error.f64\"\n",
        report.summary()
    );
    write(&args.out.join("summary.toml"), &summary)?;
    print!("{summary}");
    Ok(())
}

pub fn superres(args: SuperresArgs) -> Result<()> {
    let (model, data) = load(&args.model, &args.data)?;
    start("superres", &args.model, &args.data, &args.out)?;
    let report = superres_eval(&model, &data, args.resolution, &args.eval)?;
    let csv = report.to_csv();
    write(&args.out.join("superres.csv"), &csv)?;
    let mut summary = format!("task = \"{}\"\nbase_resolution = {}\n", data.spec.task.name(), report.base_n);
    for (i, n) in report.eval_ns.iter().enumerate() {
        summary.push_str(&format!(
            "[n{n}]\nmodel_rel_l2 = {:e}\ninterp_baseline_rel_l2 = {:e}\nratio_to_base = {:e}\n",
            report.model_rel_l2[i],
            report.baseline_rel_l2[i],
            report.model_rel_l2[i] / report.model_rel_l2[0]
        ));
    }
    write(&args.out.join("summary.toml"), summary)?;
    print!("{csv}");
    Ok(())
}
