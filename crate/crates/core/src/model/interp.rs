use crate::nn::{CustomOp, Tensor};
use crate::{Error, Result};

/// For every `dst` point: `(i, t)` such that the value is
/// `(1 - t) * f[i] + t * f[i + 1]`. Points outside `src` extrapolate from
/// the nearest interval.
pub fn linear_interp_weights(src: &[f64], dst: &[f64]) -> Vec<(usize, f64)> {
    assert!(src.len() >= 2, "interpolation needs two source points");
    let last = src.len() - 2;
    dst.iter()
        .map(|&x| {
            let i = src.partition_point(|&s| s <= x).saturating_sub(1).min(last);
            let t = (x - src[i]) / (src[i + 1] - src[i]);
            (i, t)
        })
        .collect()
}

/// Linear interpolation along the last axis of `[b, c, n_src]`.
pub struct InterpOp {
    n_src: usize,
    weights: Vec<(usize, f64)>,
}

impl InterpOp {
    pub fn new(src: &[f64], dst: &[f64]) -> Self {
        Self { n_src: src.len(), weights: linear_interp_weights(src, dst) }
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        let s = x.shape();
        if s.len() != 3 || s[2] != self.n_src {
            return Err(Error::ShapeMismatch(format!(
                "interpolation input {s:?}, expected last axis {}",
                self.n_src
            )));
        }
        let rows = s[0] * s[1];
        let n_dst = self.weights.len();
        let mut out = vec![0.0; rows * n_dst];
        for r in 0..rows {
            let src = &x.data()[r * self.n_src..(r + 1) * self.n_src];
            for (o, &(i, t)) in out[r * n_dst..(r + 1) * n_dst].iter_mut().zip(&self.weights) {
                *o = (1.0 - t) * src[i] + t * src[i + 1];
            }
        }
        Tensor::from_vec(&[s[0], s[1], n_dst], out)
    }
}

impl CustomOp for InterpOp {
    fn backward(&self, inputs: &[&Tensor], _output: &Tensor, grad_out: &Tensor) -> Result<Vec<Option<Tensor>>> {
        let x = inputs[0];
        let rows = x.shape()[0] * x.shape()[1];
        let n_dst = self.weights.len();
        let mut dx = vec![0.0; x.len()];
        for r in 0..rows {
            let g = &grad_out.data()[r * n_dst..(r + 1) * n_dst];
            let d = &mut dx[r * self.n_src..(r + 1) * self.n_src];
            for (gv, &(i, t)) in g.iter().zip(&self.weights) {
                d[i] += (1.0 - t) * gv;
                d[i + 1] += t * gv;
            }
        }
        Ok(vec![Some(Tensor::from_vec(x.shape(), dx)?)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_functions_are_reproduced() {
        let src = [0.0, 0.25, 0.5, 0.75];
        let dst: Vec<f64> = (0..16).map(|i| i as f64 / 16.0).collect();
        let op = InterpOp::new(&src, &dst);
        let x = Tensor::from_vec(&[1, 1, 4], src.iter().map(|s| 3.0 * s - 1.0).collect()).unwrap();
        let y = op.forward(&x).unwrap();
        for (v, d) in y.data().iter().zip(&dst) {
            assert!((v - (3.0 * d - 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn same_grid_is_exact() {
        let src = [0.0, 0.1, 0.35, 0.9];
        let op = InterpOp::new(&src, &src);
        let x = Tensor::from_vec(&[1, 1, 4], vec![1.3, -2.0, 7.5, 0.25]).unwrap();
        assert_eq!(op.forward(&x).unwrap(), x);
    }
}
