use std::io::Write;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::forcing::ForcingSampler;
use super::ode::{solve_duffing, solve_lorenz, solve_pendulum, OdeOptions};
use super::pde::{output_times, solve_burgers, solve_diffusion, solve_diffusion_reaction, PdeGrids};
use super::spec::{TaskKind, TaskSpec};
use crate::model::check_major;
use crate::nn::Tensor;
use crate::polycore::Grid;
use crate::{Error, Result};

/// First line of every dataset file.
pub const DATASET_MAGIC: &str = "SNODATA";
pub const DATASET_VERSION: &str = "1.0";
const PAYLOAD_MARKER: &[u8] = b"\n%%PAYLOAD%%\n";
const TRAIN_FRACTION: f64 = 0.8;

/// Per-channel mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl NormStats {
    /// Stats of `x[b, c, ..]` over the batch items in `indices`.
    pub fn compute(x: &Tensor, indices: &[usize]) -> Result<Self> {
        let c = x.shape()[1];
        let s = x.spatial_len();
        let mut mean = vec![0.0; c];
        let mut std = vec![0.0; c];
        let count = (indices.len() * s) as f64;
        for ch in 0..c {
            let vals = || indices.iter().flat_map(|&b| x.batch_item(b)[ch * s..(ch + 1) * s].iter());
            let m = vals().sum::<f64>() / count;
            let var = vals().map(|v| (v - m) * (v - m)).sum::<f64>() / count;
            mean[ch] = m;
            std[ch] = var.sqrt();
        }
        Ok(Self { mean, std })
    }

    pub fn channels(&self) -> usize {
        self.mean.len()
    }

    fn check(&self, x: &Tensor) -> Result<()> {
        if x.shape().len() < 2 || x.shape()[1] != self.channels() {
            return Err(Error::ShapeMismatch(format!(
                "stats for {} channels, tensor shape {:?}",
                self.channels(),
                x.shape()
            )));
        }
        if let Some(ch) = self.std.iter().position(|&s| !(s > 0.0)) {
            return Err(Error::DegenerateChannel(ch));
        }
        Ok(())
    }

    /// `(x - mean) / std` per channel.
    pub fn apply(&self, x: &Tensor) -> Result<Tensor> {
        self.check(x)?;
        Ok(self.map(x, |v, m, s| (v - m) / s))
    }

    pub fn invert(&self, x: &Tensor) -> Result<Tensor> {
        self.check(x)?;
        Ok(self.map(x, |v, m, s| v * s + m))
    }

    fn map(&self, x: &Tensor, f: impl Fn(f64, f64, f64) -> f64) -> Tensor {
        let s = x.spatial_len();
        let c = self.channels();
        let mut out = x.clone();
        for (i, v) in out.data_mut().iter_mut().enumerate() {
            let ch = (i / s) % c;
            *v = f(*v, self.mean[ch], self.std[ch]);
        }
        out
    }
}

/// Generated input/output pairs. The first `n_train` samples form the
/// training split, the rest the test split.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskDataset {
    pub spec: TaskSpec,
    /// `[N, in_ch, n]`.
    pub inputs: Tensor,
    /// `[N, out_ch, n]`; for PDE tasks the channels are output time slices.
    pub outputs: Tensor,
    pub grid: Grid,
    /// Positions of the PDE channels along space, empty for ODEs.
    pub space: Vec<f64>,
    /// Input stats of the training split.
    pub stats: NormStats,
    pub n_train: usize,
    normalized: bool,
}

impl TaskDataset {
    /// Assemble a dataset from raw tensors; stats come from the first
    /// `n_train` samples.
    pub fn from_parts(
        spec: TaskSpec,
        inputs: Tensor,
        outputs: Tensor,
        grid: Grid,
        space: Vec<f64>,
        n_train: usize,
    ) -> Result<Self> {
        let (xs, ys) = (inputs.shape(), outputs.shape());
        if xs.len() != 3 || ys.len() != 3 || xs[0] != ys[0] || xs[2] != grid.len() || ys[2] != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "inputs {xs:?}, outputs {ys:?}, grid of {} points",
                grid.len()
            )));
        }
        if n_train == 0 || n_train > xs[0] {
            return Err(Error::Config(format!("training split of {n_train} from {} samples", xs[0])));
        }
        let stats = NormStats::compute(&inputs, &(0..n_train).collect::<Vec<_>>())?;
        Ok(Self { spec, inputs, outputs, grid, space, stats, n_train, normalized: false })
    }

    pub fn len(&self) -> usize {
        self.inputs.shape()[0]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn train_indices(&self) -> Vec<usize> {
        (0..self.n_train).collect()
    }

    pub fn test_indices(&self) -> Vec<usize> {
        (self.n_train..self.len()).collect()
    }

    /// Standardize the inputs in place with the training-split stats.
    pub fn normalize(&mut self) -> Result<()> {
        if self.normalized {
            return Err(Error::AlreadyNormalized);
        }
        self.inputs = self.stats.apply(&self.inputs)?;
        self.normalized = true;
        Ok(())
    }

    pub fn denormalize(&mut self) -> Result<()> {
        if !self.normalized {
            return Err(Error::NotNormalized);
        }
        self.inputs = self.stats.invert(&self.inputs)?;
        self.normalized = false;
        Ok(())
    }

    /// Every `stride`-th grid point counted back from the last one; stats
    /// are recomputed on the coarse data.
    pub fn subsample(&self, stride: usize) -> Result<TaskDataset> {
        if self.normalized {
            return Err(Error::AlreadyNormalized);
        }
        let grid = self.grid.subsample(stride)?;
        let pick = |t: &Tensor| -> Result<Tensor> {
            let (b, c, n) = (t.shape()[0], t.shape()[1], t.shape()[2]);
            let skip = (n - 1) % stride;
            let data: Vec<f64> = t
                .data()
                .chunks(n)
                .flat_map(|row| row.iter().skip(skip).step_by(stride).copied())
                .collect();
            Tensor::from_vec(&[b, c, grid.len()], data)
        };
        let inputs = pick(&self.inputs)?;
        let stats = NormStats::compute(&inputs, &self.train_indices())?;
        let mut spec = self.spec.clone();
        spec.resolution = grid.len();
        Ok(TaskDataset {
            spec,
            inputs,
            outputs: pick(&self.outputs)?,
            grid,
            space: self.space.clone(),
            stats,
            n_train: self.n_train,
            normalized: false,
        })
    }
}

/// The time grid the operator acts on: `[0, T]` for ODEs, the PDE output
/// times `T/n, 2T/n, ..., T` otherwise.
pub fn task_grid(spec: &TaskSpec) -> Result<Grid> {
    if spec.task.is_pde() {
        Grid::new(output_times(spec.duration(), spec.resolution))
    } else {
        Grid::uniform(0.0, spec.duration(), spec.resolution)
    }
}

/// One sample: (input channels, output channels), each channel `n` long.
fn solve_sample(spec: &TaskSpec, grid: &Grid, pde: Option<&PdeGrids>, index: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let sampler = ForcingSampler { seed: spec.seed, band: spec.modes(), scale: spec.amplitude() };
    let opts = OdeOptions { substeps: spec.substeps(), sample: index };
    let on_sample = |e: Error| match e {
        Error::SolverDiverged { time, .. } => Error::SolverDiverged { sample: index, time },
        Error::CflViolation { .. } | Error::NumericalFault(_) => {
            Error::NumericalFault(format!("sample {index}: {e}"))
        }
        e => e,
    };
    match spec.task {
        TaskKind::Duffing | TaskKind::Pendulum => {
            let forcing = sampler.draw(index, spec.duration());
            let f = |t: f64| forcing.eval(t);
            let traj = if spec.task == TaskKind::Duffing {
                solve_duffing(f, spec.damping(), (1.0, 1.0), [0.0; 2], grid, opts)?
            } else {
                solve_pendulum(f, spec.damping(), [0.0; 2], grid, opts)?
            };
            Ok((forcing.sample(grid).values, traj.iter().map(|s| s[0]).collect()))
        }
        TaskKind::Lorenz => {
            let mut rng = sampler.rng(index);
            let a = spec.amplitude();
            let ic: [f64; 3] = std::array::from_fn(|_| rng.random_range(-a..=a));
            let traj = solve_lorenz(ic, spec.rho(), grid, opts)?;
            let n = grid.len();
            let mut input = Vec::with_capacity(4 * n);
            for v in ic {
                input.extend(std::iter::repeat_n(v, n));
            }
            input.extend(grid.points().iter().map(|t| t / spec.duration()));
            Ok((input, traj.iter().map(|s| s[0]).collect()))
        }
        TaskKind::Diffusion | TaskKind::Burgers | TaskKind::DiffusionReaction => {
            let grids = pde.expect("PDE grids");
            let n_t = grid.len();
            let f = sampler.draw(index, spec.length());
            let mut u0 = f.sample(&grids.x).values;
            let out = match spec.task {
                TaskKind::Diffusion => solve_diffusion(&u0, spec.diffusivity(), grids),
                TaskKind::Burgers => solve_burgers(&u0, spec.viscosity(), grids),
                _ => {
                    u0.iter_mut().for_each(|v| *v = 0.5 + 0.5 * v.tanh());
                    solve_diffusion_reaction(&u0, spec.diffusivity(), spec.reaction(), grids)
                }
            }
            .map_err(on_sample)?;
            // [x][t] layout: one channel per spatial point, time along the axis
            let mut input = Vec::with_capacity((u0.len() + 1) * n_t);
            for &v in &u0 {
                input.extend(std::iter::repeat_n(v, n_t));
            }
            input.extend(grid.points().iter().map(|t| t / spec.duration()));
            let output = (0..u0.len()).flat_map(|i| out.iter().map(move |row| row[i])).collect();
            Ok((input, output))
        }
    }
}

/// Generate the dataset described by `spec`. Samples are solved in parallel;
/// each draws from its own random stream, so the result is independent of
/// scheduling.
pub fn build_dataset(spec: &TaskSpec) -> Result<TaskDataset> {
    spec.validate()?;
    let grid = task_grid(spec)?;
    let pde = if spec.task.is_pde() {
        Some(PdeGrids::new(spec.length(), spec.space_points(), spec.duration(), spec.resolution, spec.substeps())?)
    } else {
        None
    };
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..spec.samples)
        .into_par_iter()
        .map(|i| solve_sample(spec, &grid, pde.as_ref(), i))
        .collect::<Result<_>>()?;
    let n = grid.len();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (x, y) in pairs {
        xs.extend(x);
        ys.extend(y);
    }
    let inputs = Tensor::from_vec(&[spec.samples, spec.in_channels(), n], xs)?;
    let outputs = Tensor::from_vec(&[spec.samples, spec.out_channels(), n], ys)?;
    inputs.ensure_finite("dataset inputs")?;
    outputs.ensure_finite("dataset outputs")?;
    let n_train = ((spec.samples as f64 * TRAIN_FRACTION).round() as usize).clamp(1, spec.samples);
    let stats = NormStats::compute(&inputs, &(0..n_train).collect::<Vec<_>>())?;
    Ok(TaskDataset {
        spec: spec.clone(),
        inputs,
        outputs,
        grid,
        space: pde.map(|p| p.x.points().to_vec()).unwrap_or_default(),
        stats,
        n_train,
        normalized: false,
    })
}

#[derive(Serialize, Deserialize)]
struct Header {
    format_version: String,
    n_train: usize,
    normalized: bool,
    input_shape: Vec<usize>,
    output_shape: Vec<usize>,
    grid_len: usize,
    space_len: usize,
    spec: TaskSpec,
    stats: NormStats,
}

/// Header line, TOML header, payload marker, then little-endian `f64`
/// payloads: inputs, outputs, grid, channel positions.
pub fn write_dataset(ds: &TaskDataset, path: &Path) -> Result<()> {
    let header = Header {
        format_version: DATASET_VERSION.into(),
        n_train: ds.n_train,
        normalized: ds.normalized,
        input_shape: ds.inputs.shape().to_vec(),
        output_shape: ds.outputs.shape().to_vec(),
        grid_len: ds.grid.len(),
        space_len: ds.space.len(),
        spec: ds.spec.clone(),
        stats: ds.stats.clone(),
    };
    let text = toml::to_string(&header).map_err(|e| Error::Format(e.to_string()))?;
    let mut buf = Vec::with_capacity(8 * (ds.inputs.len() + ds.outputs.len()) + text.len() + 64);
    writeln!(buf, "{DATASET_MAGIC} {DATASET_VERSION}")?;
    buf.extend_from_slice(text.as_bytes());
    buf.extend_from_slice(PAYLOAD_MARKER);
    for v in ds.inputs.data().iter().chain(ds.outputs.data()).chain(ds.grid.points()).chain(&ds.space) {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn read_dataset(path: &Path) -> Result<TaskDataset> {
    let bytes = std::fs::read(path)?;
    let fmt = |m: &str| Error::Format(format!("{}: {m}", path.display()));
    let nl = bytes.iter().position(|&b| b == b'\n').ok_or_else(|| fmt("missing header line"))?;
    let first = std::str::from_utf8(&bytes[..nl]).map_err(|_| fmt("header line is not UTF-8"))?;
    let version = first
        .strip_prefix(DATASET_MAGIC)
        .map(str::trim)
        .ok_or_else(|| fmt("not a dataset file"))?;
    check_major(version, DATASET_VERSION)?;
    let marker = bytes
        .windows(PAYLOAD_MARKER.len())
        .position(|w| w == PAYLOAD_MARKER)
        .ok_or_else(|| fmt("missing payload marker"))?;
    let text = std::str::from_utf8(&bytes[nl + 1..marker]).map_err(|_| fmt("header is not UTF-8"))?;
    let h: Header = toml::from_str(text).map_err(|e| fmt(&e.to_string()))?;
    check_major(&h.format_version, DATASET_VERSION)?;
    let payload = &bytes[marker + PAYLOAD_MARKER.len()..];
    let n_in: usize = h.input_shape.iter().product();
    let n_out: usize = h.output_shape.iter().product();
    let total = n_in + n_out + h.grid_len + h.space_len;
    if payload.len() != 8 * total {
        return Err(fmt(&format!("payload holds {} bytes, header declares {}", payload.len(), 8 * total)));
    }
    let mut vals = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")));
    let mut take = |k: usize| vals.by_ref().take(k).collect::<Vec<f64>>();
    let inputs = Tensor::from_vec(&h.input_shape, take(n_in))?;
    let outputs = Tensor::from_vec(&h.output_shape, take(n_out))?;
    let grid = Grid::new(take(h.grid_len))?;
    let space = take(h.space_len);
    if inputs.shape().len() != 3 || outputs.shape().len() != 3 || inputs.shape()[0] != outputs.shape()[0] {
        return Err(fmt("inconsistent tensor shapes"));
    }
    if h.n_train > inputs.shape()[0] {
        return Err(fmt("training split larger than the dataset"));
    }
    Ok(TaskDataset {
        spec: h.spec,
        inputs,
        outputs,
        grid,
        space,
        stats: h.stats,
        n_train: h.n_train,
        normalized: h.normalized,
    })
}
