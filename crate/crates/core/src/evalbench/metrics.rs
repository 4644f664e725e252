use std::fmt::Write as _;

use crate::datagen::TaskDataset;
use crate::model::{forward, SnoModel};
use crate::nn::Tensor;
use crate::{Error, Result};

/// `‖pred_b - truth_b‖ / ‖truth_b‖` for every batch item.
pub fn per_sample_rel_l2(pred: &Tensor, truth: &Tensor) -> Result<Vec<f64>> {
    if pred.shape() != truth.shape() || pred.shape().is_empty() {
        return Err(Error::ShapeMismatch(format!(
            "prediction {:?} vs truth {:?}",
            pred.shape(),
            truth.shape()
        )));
    }
    let b = pred.shape()[0];
    (0..b)
        .map(|i| {
            let (p, t) = (pred.batch_item(i), truth.batch_item(i));
            let tn = t.iter().map(|v| v * v).sum::<f64>().sqrt();
            if tn == 0.0 {
                return Err(Error::ZeroTarget(i));
            }
            let en = p.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            Ok(en / tn)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub task: String,
    pub mean: f64,
    pub median: f64,
    pub max: f64,
    pub min: f64,
    pub per_sample: Vec<f64>,
    /// Dataset index of the worst sample and its `|pred - truth|` field.
    pub worst: (usize, Vec<f64>),
    /// Same for the sample at the (lower) median error.
    pub median_sample: (usize, Vec<f64>),
}

impl EvalReport {
    /// `sample,rel_l2`, one row per test sample.
    pub fn to_csv(&self, indices: &[usize]) -> String {
        let mut s = String::from("sample,rel_l2\n");
        for (i, e) in indices.iter().zip(&self.per_sample) {
            let _ = writeln!(s, "{i},{e:e}");
        }
        s
    }

    pub fn summary(&self) -> String {
        format!(
            "task = \"{}\"\nsamples = {}\nmean_rel_l2 = {:e}\nmedian_rel_l2 = {:e}\nmax_rel_l2 = {:e}\nmin_rel_l2 = {:e}\nworst_sample = {}\nmedian_sample = {}\n",
            self.task,
            self.per_sample.len(),
            self.mean,
            self.median,
            self.max,
            self.min,
            self.worst.0,
            self.median_sample.0
        )
    }
}

/// Report for precomputed predictions of the samples `indices`.
pub fn evaluate_predictions(task: &str, pred: &Tensor, truth: &Tensor, indices: &[usize]) -> Result<EvalReport> {
    let errs = per_sample_rel_l2(pred, truth)?;
    if errs.is_empty() {
        return Err(Error::EmptySplit);
    }
    let mut order: Vec<usize> = (0..errs.len()).collect();
    order.sort_by(|&a, &b| errs[a].total_cmp(&errs[b]));
    let k = errs.len();
    let median = if k % 2 == 1 {
        errs[order[k / 2]]
    } else {
        0.5 * (errs[order[k / 2 - 1]] + errs[order[k / 2]])
    };
    let field = |i: usize| -> (usize, Vec<f64>) {
        let diff = pred.batch_item(i).iter().zip(truth.batch_item(i)).map(|(a, b)| (a - b).abs()).collect();
        (indices.get(i).copied().unwrap_or(i), diff)
    };
    Ok(EvalReport {
        task: task.to_owned(),
        mean: errs.iter().sum::<f64>() / k as f64,
        median,
        max: errs[order[k - 1]],
        min: errs[order[0]],
        worst: field(order[k - 1]),
        median_sample: field(order[(k - 1) / 2]),
        per_sample: errs,
    })
}

/// Inputs as the model expects them: datasets that are not yet normalized
/// are standardized with the model's stored training stats.
pub fn model_inputs(model: &SnoModel, data: &TaskDataset) -> Result<Tensor> {
    match (&model.input_stats, data.is_normalized()) {
        (Some(stats), false) => stats.apply(&data.inputs),
        _ => Ok(data.inputs.clone()),
    }
}

/// Relative L2 of the model on the test split, outputs in physical units.
pub fn evaluate(model: &SnoModel, data: &TaskDataset) -> Result<EvalReport> {
    let test = data.test_indices();
    if test.is_empty() {
        return Err(Error::EmptySplit);
    }
    let x = model_inputs(model, data)?.gather_batch(&test);
    let pred = forward(model, &x, &data.grid)?;
    evaluate_predictions(data.spec.task.name(), &pred, &data.outputs.gather_batch(&test), &test)
}
