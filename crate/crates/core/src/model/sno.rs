use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::ModelConfig;
use super::interp::InterpOp;
use super::spectral::SpectralConv;
use crate::datagen::NormStats;
use crate::nn::{ParamId, ParamStore, Tape, Tensor, Var};
use crate::polycore::{check_node, global_fit_cache, Grid};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerParams {
    /// `[degree + 1, width, width]` per-mode channel mixing in Sumudu space.
    pub spectral: ParamId,
    /// Pointwise bias path `[width, width]` and its offset `[width]`.
    pub bias_weight: ParamId,
    pub bias: ParamId,
}

#[derive(Debug, Clone)]
pub struct SnoModel {
    pub config: ModelConfig,
    pub params: ParamStore,
    pub lift_weight: ParamId,
    pub lift_bias: ParamId,
    pub layers: Vec<LayerParams>,
    pub project: [ParamId; 4],
    /// Input normalization the model was trained with, if any.
    pub input_stats: Option<NormStats>,
}

fn uniform(shape: &[usize], bound: f64, rng: &mut ChaCha8Rng) -> Tensor {
    let n: usize = shape.iter().product();
    let data = (0..n)
        .map(|_| if bound > 0.0 { rng.random_range(-bound..bound) } else { 0.0 })
        .collect();
    Tensor::from_vec(shape, data).expect("shape product")
}

/// Spectral weights `U(-s, s)` with `s = 1 / (width (degree + 1))`; linear
/// maps `U(-1/√fan_in, 1/√fan_in)` for weights and offsets.
pub fn init_model(config: ModelConfig) -> Result<SnoModel> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (w, modes) = (config.width, config.degree + 1);
    let mut params = ParamStore::new();
    let fan = |n: usize| 1.0 / (n as f64).sqrt();

    let lift_weight = params.add("lift.weight", uniform(&[w, config.in_channels], fan(config.in_channels), &mut rng))?;
    let lift_bias = params.add("lift.bias", uniform(&[w], fan(config.in_channels), &mut rng))?;
    let spectral_scale = 1.0 / (w * modes) as f64;
    let mut layers = Vec::with_capacity(config.n_layers);
    for k in 0..config.n_layers {
        let spectral = params.add(&format!("layers.{k}.spectral"), uniform(&[modes, w, w], spectral_scale, &mut rng))?;
        let bias_weight = params.add(&format!("layers.{k}.bias_w.weight"), uniform(&[w, w], fan(w), &mut rng))?;
        let bias = params.add(&format!("layers.{k}.bias_w.bias"), uniform(&[w], fan(w), &mut rng))?;
        layers.push(LayerParams { spectral, bias_weight, bias });
    }
    let p0w = params.add("project.0.weight", uniform(&[w, w], fan(w), &mut rng))?;
    let p0b = params.add("project.0.bias", uniform(&[w], fan(w), &mut rng))?;
    let p1w = params.add("project.1.weight", uniform(&[config.out_channels, w], fan(w), &mut rng))?;
    let p1b = params.add("project.1.bias", uniform(&[config.out_channels], fan(w), &mut rng))?;

    Ok(SnoModel {
        config,
        params,
        lift_weight,
        lift_bias,
        layers,
        project: [p0w, p0b, p1w, p1b],
        input_stats: None,
    })
}

impl SnoModel {
    /// Record the forward pass on `tape`. When `eval_grid` differs from
    /// `train_grid`, the last spectral layer evaluates its polynomial on
    /// `eval_grid` and its bias path sees the hidden state linearly
    /// interpolated there; everything before runs at training resolution.
    pub fn record(&self, tape: &mut Tape, x: &Tensor, train_grid: &Grid, eval_grid: Option<&Grid>) -> Result<Var> {
        let shape = x.shape();
        if shape.len() != 3 || shape[1] != self.config.in_channels || shape[2] != train_grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "model input {shape:?}, expected [batch, {}, {}]",
                self.config.in_channels,
                train_grid.len()
            )));
        }
        let fitop = global_fit_cache().get(train_grid, self.config.degree)?;
        let eval_grid = eval_grid.filter(|g| *g != train_grid);
        let eval_nodes = match eval_grid {
            None => None,
            Some(g) => Some(
                g.points()
                    .iter()
                    .map(|&p| {
                        let z = fitop.domain_map.apply(p);
                        check_node(p, z).map(|_| z)
                    })
                    .collect::<Result<Vec<f64>>>()?,
            ),
        };

        let p = &self.params;
        let xin = tape.input(x.clone());
        let lw = tape.param(p, self.lift_weight);
        let lb = tape.param(p, self.lift_bias);
        let mut h = tape.linear(xin, lw, lb)?;

        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            let sw = tape.param(p, layer.spectral);
            let bw = tape.param(p, layer.bias_weight);
            let bb = tape.param(p, layer.bias);
            let (nodes, bias_in) = match (&eval_nodes, eval_grid) {
                (Some(nodes), Some(g)) if k == last => {
                    let op = InterpOp::new(train_grid.points(), g.points());
                    let hv = op.forward(tape.value(h)?)?;
                    (nodes.clone(), tape.custom(&[h], hv, Box::new(op))?)
                }
                _ => (fitop.nodes.clone(), h),
            };
            let conv = SpectralConv::new(fitop.clone(), nodes);
            let spec_val = conv.forward(tape.value(h)?, tape.value(sw)?)?;
            let spec = tape.custom(&[h, sw], spec_val, Box::new(conv))?;
            let local = tape.linear(bias_in, bw, bb)?;
            let pre = tape.add(spec, local)?;
            h = if k == last { pre } else { tape.activation(pre)? };
        }

        let [p0w, p0b, p1w, p1b] = self.project.map(|id| tape.param(p, id));
        let a = tape.linear(h, p0w, p0b)?;
        let a = tape.activation(a)?;
        tape.linear(a, p1w, p1b)
    }

    pub fn parameter_count(&self) -> usize {
        self.params.num_values()
    }
}

/// `P(layers(L(x)))` on the training grid.
pub fn forward(model: &SnoModel, x: &Tensor, grid: &Grid) -> Result<Tensor> {
    let mut tape = Tape::new();
    let out = model.record(&mut tape, x, grid, None)?;
    Ok(tape.value(out)?.clone())
}

/// Zero-shot evaluation on `eval_grid` from inputs sampled on `train_grid`.
pub fn forward_at_resolution(model: &SnoModel, x: &Tensor, train_grid: &Grid, eval_grid: &Grid) -> Result<Tensor> {
    let mut tape = Tape::new();
    let out = model.record(&mut tape, x, train_grid, Some(eval_grid))?;
    Ok(tape.value(out)?.clone())
}
