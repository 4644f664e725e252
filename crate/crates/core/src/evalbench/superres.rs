use crate::datagen::TaskDataset;
use crate::model::{forward, forward_at_resolution, InterpOp, SnoModel};
use crate::nn::Tensor;
use crate::polycore::Grid;
use crate::{Error, Result};

use super::metrics::{model_inputs, per_sample_rel_l2};

#[derive(Debug, Clone, PartialEq)]
pub struct SuperResReport {
    pub base_n: usize,
    /// Evaluation resolutions; the first entry is `base_n`.
    pub eval_ns: Vec<usize>,
    /// Mean test relative L2 of the model at each resolution.
    pub model_rel_l2: Vec<f64>,
    /// Same for the base-resolution prediction linearly interpolated.
    pub baseline_rel_l2: Vec<f64>,
}

impl SuperResReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,model_rel_l2,interp_baseline_rel_l2\n");
        for i in 0..self.eval_ns.len() {
            s.push_str(&format!("{},{:e},{:e}\n", self.eval_ns[i], self.model_rel_l2[i], self.baseline_rel_l2[i]));
        }
        s
    }
}

/// Stride that subsamples `grid` to exactly `n` points: `N / n` for
/// half-open (periodic) grids, `(N - 1) / (n - 1)` for grids keeping both
/// endpoints.
pub fn nested_stride(grid: &Grid, n: usize) -> Result<usize> {
    let big = grid.len();
    let incompatible = || Error::GridIncompatible(format!("{n} points are not a nested subsampling of {big}"));
    if n < 2 || n > big {
        return Err(incompatible());
    }
    let candidates = [
        big.is_multiple_of(n).then(|| big / n),
        (big - 1).is_multiple_of(n - 1).then(|| (big - 1) / (n - 1)),
    ];
    candidates
        .into_iter()
        .flatten()
        .find(|&s| grid.subsample(s).map(|g| g.len() == n).unwrap_or(false))
        .ok_or_else(incompatible)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Feed the model inputs subsampled to `base_n` points and compare its
/// predictions on each finer nested grid against the fine ground truth.
pub fn superres_eval(model: &SnoModel, fine: &TaskDataset, base_n: usize, eval_ns: &[usize]) -> Result<SuperResReport> {
    let test = fine.test_indices();
    if test.is_empty() {
        return Err(Error::EmptySplit);
    }
    if fine.is_normalized() {
        return Err(Error::AlreadyNormalized);
    }
    let base = fine.subsample(nested_stride(&fine.grid, base_n)?)?;
    let x = model_inputs(model, &base)?.gather_batch(&test);
    let base_pred = forward(model, &x, &base.grid)?;

    let mut ns = vec![base_n];
    ns.extend(eval_ns.iter().copied().filter(|&n| n != base_n));
    let mut report = SuperResReport { base_n, eval_ns: ns.clone(), model_rel_l2: vec![], baseline_rel_l2: vec![] };
    for n in ns {
        let stride = nested_stride(&fine.grid, n)?;
        let grid = fine.grid.subsample(stride)?;
        let truth = fine.subsample(stride)?.outputs.gather_batch(&test);
        let pred = forward_at_resolution(model, &x, &base.grid, &grid)?;
        let interp: Tensor = InterpOp::new(base.grid.points(), grid.points()).forward(&base_pred)?;
        report.model_rel_l2.push(mean(&per_sample_rel_l2(&pred, &truth)?));
        report.baseline_rel_l2.push(mean(&per_sample_rel_l2(&interp, &truth)?));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strides_for_both_grid_kinds() {
        let periodic = Grid::periodic(1.0, 256).unwrap();
        assert_eq!(nested_stride(&periodic, 64).unwrap(), 4);
        assert_eq!(nested_stride(&periodic, 256).unwrap(), 1);
        let closed = Grid::uniform(0.0, 1.0, 129).unwrap();
        assert_eq!(nested_stride(&closed, 33).unwrap(), 4);
        assert!(matches!(nested_stride(&periodic, 48), Err(Error::GridIncompatible(_))));
        assert!(matches!(nested_stride(&closed, 300), Err(Error::GridIncompatible(_))));
    }
}
