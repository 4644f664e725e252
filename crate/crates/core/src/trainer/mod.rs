//! Mini-batch training with Adam on the relative L2 loss, per-epoch test
//! metrics, checkpointing and CSV loss curves.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datagen::TaskDataset;
use crate::evalbench::per_sample_rel_l2;
use crate::model::{forward, save_checkpoint, ModelConfig, SnoModel};
use crate::nn::{adam_step, AdamState, Tape, Tensor};
use crate::polycore::Grid;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Seeds the batch shuffling.
    pub seed: u64,
    /// Save a checkpoint every this many epochs (0: only at the end).
    pub checkpoint_every: usize,
    /// Task the run is meant for; informational.
    pub task: Option<String>,
    pub model: ModelConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            batch_size: 20,
            epochs: 1000,
            seed: 0,
            checkpoint_every: 0,
            task: None,
            model: ModelConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0) || !self.lr.is_finite() {
            return Err(Error::Config(format!("lr must be positive, got {}", self.lr)));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::Config("batch_size and epochs must be at least 1".into()));
        }
        self.model.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub train_loss: Vec<f64>,
    /// Mean per-sample relative L2 on the test split (NaN without one).
    pub test_rel_l2: Vec<f64>,
    pub seconds: Vec<f64>,
    pub steps: usize,
    pub checkpoint: Option<PathBuf>,
}

impl TrainReport {
    pub fn epochs(&self) -> usize {
        self.train_loss.len()
    }

    /// `epoch,train_loss,test_rel_l2,seconds`, one row per epoch.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,train_loss,test_rel_l2,seconds\n");
        for e in 0..self.epochs() {
            let _ = writeln!(
                s,
                "{},{:e},{:e},{:.6}",
                e + 1,
                self.train_loss[e],
                self.test_rel_l2[e],
                self.seconds[e]
            );
        }
        s
    }
}

/// Trailing moving average with the given window (shorter at the start).
pub fn smoothed(values: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    for (i, v) in values.iter().enumerate() {
        acc += v;
        if i >= window {
            acc -= values[i - window];
        }
        out.push(acc / (i + 1).min(window) as f64);
    }
    out
}

/// Loss of one batch and its parameter gradients accumulated into
/// `model.params`.
pub fn loss_and_grad(model: &mut SnoModel, x: &Tensor, y: &Tensor, grid: &Grid) -> Result<f64> {
    let mut tape = Tape::new();
    let out = model.record(&mut tape, x, grid, None)?;
    let loss = tape.rel_l2(out, y)?;
    let value = tape.value(loss)?.data()[0];
    if !value.is_finite() {
        return Err(Error::NumericalFault(format!("non-finite loss {value}")));
    }
    tape.backward(loss, &mut model.params)?;
    Ok(value)
}

/// Mean relative L2 of the model on the given samples, evaluated in chunks.
pub fn mean_rel_l2(model: &SnoModel, inputs: &Tensor, outputs: &Tensor, grid: &Grid, indices: &[usize]) -> Result<f64> {
    if indices.is_empty() {
        return Ok(f64::NAN);
    }
    let mut total = 0.0;
    for chunk in indices.chunks(64) {
        let pred = forward(model, &inputs.gather_batch(chunk), grid)?;
        total += per_sample_rel_l2(&pred, &outputs.gather_batch(chunk))?.iter().sum::<f64>();
    }
    Ok(total / indices.len() as f64)
}

/// Train on the first `n_train` samples of a normalized dataset. With a
/// checkpoint path, saves at the configured cadence and after the last epoch.
pub fn train(model: &mut SnoModel, data: &TaskDataset, config: &TrainConfig, checkpoint: Option<&Path>) -> Result<TrainReport> {
    train_with(model, data, config, checkpoint, |_, _| {})
}

/// [`train`] with a callback invoked after every epoch.
pub fn train_with(
    model: &mut SnoModel,
    data: &TaskDataset,
    config: &TrainConfig,
    checkpoint: Option<&Path>,
    mut on_epoch: impl FnMut(usize, &TrainReport),
) -> Result<TrainReport> {
    config.validate()?;
    if !data.is_normalized() {
        return Err(Error::NotNormalized);
    }
    model.input_stats = Some(data.stats.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut adam = AdamState::new(&model.params, config.lr);
    let mut order = data.train_indices();
    let test = data.test_indices();
    let mut report = TrainReport {
        train_loss: Vec::with_capacity(config.epochs),
        test_rel_l2: Vec::with_capacity(config.epochs),
        seconds: Vec::with_capacity(config.epochs),
        steps: 0,
        checkpoint: None,
    };
    for epoch in 0..config.epochs {
        let start = Instant::now();
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for (bi, batch) in order.chunks(config.batch_size).enumerate() {
            let x = data.inputs.gather_batch(batch);
            let y = data.outputs.gather_batch(batch);
            let at = |e: Error| match e {
                Error::NumericalFault(m) => Error::NumericalFault(format!("epoch {}, batch {bi}: {m}", epoch + 1)),
                e => e,
            };
            let loss = loss_and_grad(model, &x, &y, &data.grid).map_err(at)?;
            adam_step(&mut model.params, &mut adam).map_err(at)?;
            report.steps += 1;
            total += loss * batch.len() as f64;
        }
        let test_err = mean_rel_l2(model, &data.inputs, &data.outputs, &data.grid, &test)?;
        report.train_loss.push(total / order.len() as f64);
        report.test_rel_l2.push(test_err);
        report.seconds.push(start.elapsed().as_secs_f64());
        if let Some(path) = checkpoint {
            let last = epoch + 1 == config.epochs;
            if last || (config.checkpoint_every > 0 && (epoch + 1) % config.checkpoint_every == 0) {
                save_checkpoint(model, path)?;
                report.checkpoint = Some(path.to_path_buf());
            }
        }
        on_epoch(epoch + 1, &report);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{build_dataset, TaskKind, TaskSpec};
    use crate::model::init_model;
    use crate::nn::{activation, linear};

    fn tiny(samples: usize) -> (TaskDataset, TrainConfig) {
        let mut spec = TaskSpec::new(TaskKind::Diffusion, samples, 32);
        spec.space_points = Some(32);
        let mut ds = build_dataset(&spec).unwrap();
        ds.normalize().unwrap();
        let config = TrainConfig {
            epochs: 2,
            model: ModelConfig {
                width: 4,
                n_layers: 2,
                degree: 4,
                in_channels: spec.in_channels(),
                out_channels: spec.out_channels(),
                seed: 1,
            },
            ..TrainConfig::default()
        };
        (ds, config)
    }

    #[test]
    fn one_epoch_of_one_batch_is_one_step() {
        let (ds, mut config) = tiny(25);
        config.epochs = 1;
        let mut m = init_model(config.model.clone()).unwrap();
        let r = train(&mut m, &ds, &config, None).unwrap();
        assert_eq!(r.steps, 1);
        assert_eq!(r.epochs(), 1);
        assert_eq!(r.to_csv().lines().count(), 2);
    }

    #[test]
    fn zero_targets_surface_the_loss_error() {
        let (ds, config) = tiny(10);
        let zeros = Tensor::zeros(ds.outputs.shape());
        let mut zd = TaskDataset::from_parts(ds.spec.clone(), ds.inputs.clone(), zeros, ds.grid.clone(), vec![], 8).unwrap();
        zd.normalize().unwrap();
        let mut m = init_model(config.model.clone()).unwrap();
        for id in m.params.ids().collect::<Vec<_>>() {
            m.params.value_mut(id).fill(0.0);
        }
        assert!(matches!(train(&mut m, &zd, &config, None), Err(Error::ZeroTarget(_))));
    }

    #[test]
    fn requires_normalized_data_and_valid_config() {
        let (mut ds, mut config) = tiny(10);
        let mut m = init_model(config.model.clone()).unwrap();
        ds.denormalize().unwrap();
        assert_eq!(train(&mut m, &ds, &config, None), Err(Error::NotNormalized));
        ds.normalize().unwrap();
        config.lr = 0.0;
        assert!(matches!(train(&mut m, &ds, &config, None), Err(Error::Config(_))));
    }

    #[test]
    fn training_is_deterministic_and_reduces_loss() {
        let (ds, mut config) = tiny(40);
        config.epochs = 30;
        config.batch_size = 8;
        config.lr = 1e-2;
        let run = || {
            let mut m = init_model(config.model.clone()).unwrap();
            train(&mut m, &ds, &config, None).unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(a.train_loss, b.train_loss);
        assert_eq!(a.test_rel_l2, b.test_rel_l2);
        assert!(a.train_loss[29] < 0.5 * a.train_loss[0], "{:?}", a.train_loss);
    }

    #[test]
    fn zero_spectral_weights_leave_the_bias_path() {
        let (ds, config) = tiny(10);
        let mut m = init_model(config.model.clone()).unwrap();
        for l in m.layers.clone() {
            m.params.value_mut(l.spectral).fill(0.0);
        }
        let x = ds.inputs.gather_batch(&[0, 1, 2]);
        let p = &m.params;
        let mut h = linear(&x, p.value(m.lift_weight), p.value(m.lift_bias)).unwrap();
        for (k, l) in m.layers.iter().enumerate() {
            h = linear(&h, p.value(l.bias_weight), p.value(l.bias)).unwrap();
            if k + 1 < m.layers.len() {
                h = activation(&h);
            }
        }
        let [p0w, p0b, p1w, p1b] = m.project;
        let h = activation(&linear(&h, p.value(p0w), p.value(p0b)).unwrap());
        let expect = linear(&h, p.value(p1w), p.value(p1b)).unwrap();
        let got = forward(&m, &x, &ds.grid).unwrap();
        for (a, b) in got.data().iter().zip(expect.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn checkpoints_at_cadence_and_end() {
        let (ds, mut config) = tiny(10);
        config.epochs = 3;
        config.checkpoint_every = 2;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.ckpt");
        let mut m = init_model(config.model.clone()).unwrap();
        let mut saved = Vec::new();
        let r = train_with(&mut m, &ds, &config, Some(&path), |e, _| saved.push((e, path.exists()))).unwrap();
        assert_eq!(saved, vec![(1, false), (2, true), (3, true)]);
        assert_eq!(r.checkpoint.as_deref(), Some(path.as_path()));
        let back = crate::model::load_checkpoint(&path).unwrap();
        let test = ds.test_indices();
        assert_eq!(
            mean_rel_l2(&back, &ds.inputs, &ds.outputs, &ds.grid, &test).unwrap(),
            mean_rel_l2(&m, &ds.inputs, &ds.outputs, &ds.grid, &test).unwrap()
        );
    }

    #[test]
    fn smoothing_window() {
        assert_eq!(smoothed(&[4.0, 2.0, 0.0, 2.0], 2), vec![4.0, 3.0, 1.0, 1.0]);
    }
}
