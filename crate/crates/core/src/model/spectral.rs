use std::sync::Arc;

use crate::nn::{CustomOp, Tensor};
use crate::polycore::{factorials, vandermonde_rows, FitOperator};
use crate::{Error, Result};

/// Spectral path of one layer for a batch `h: [b, width, n]`:
/// fit each channel, scale coefficients by `m!`, mix channels per mode with
/// `weights[m]`, divide by `m!`, evaluate on `eval_nodes`.
pub struct SpectralConv {
    fitop: Arc<FitOperator>,
    /// `n_eval x (d+1)` powers of the normalized evaluation nodes.
    eval_powers: Vec<f64>,
    eval_nodes: Vec<f64>,
    fact: Vec<f64>,
}

impl SpectralConv {
    pub fn new(fitop: Arc<FitOperator>, eval_nodes: Vec<f64>) -> Self {
        let d = fitop.degree();
        let eval_powers = vandermonde_rows(&eval_nodes, d).as_slice().to_vec();
        Self { fact: factorials(d), fitop, eval_powers, eval_nodes }
    }

    fn dims(&self, h: &Tensor, weights: &Tensor) -> Result<(usize, usize, usize)> {
        let modes = self.fact.len();
        let hs = h.shape();
        if hs.len() != 3 || hs[2] != self.fitop.n() {
            return Err(Error::ShapeMismatch(format!(
                "spectral layer: hidden state {hs:?} vs fit operator for {} points",
                self.fitop.n()
            )));
        }
        let w = hs[1];
        if weights.shape() != [modes, w, w] {
            return Err(Error::ShapeMismatch(format!(
                "spectral weights {:?}, expected [{modes}, {w}, {w}]",
                weights.shape()
            )));
        }
        Ok((hs[0], w, hs[2]))
    }

    /// Sumudu-space coefficients `S[c][m] = m! * (pinv h_c)[m]` for one item.
    fn spectrum(&self, h: &[f64], width: usize, n: usize) -> Vec<f64> {
        let modes = self.fact.len();
        let pinv = self.fitop.pinv.as_slice();
        let mut s = vec![0.0; width * modes];
        for c in 0..width {
            let hc = &h[c * n..(c + 1) * n];
            for m in 0..modes {
                let row = &pinv[m * n..(m + 1) * n];
                let coeff: f64 = row.iter().zip(hc).map(|(a, b)| a * b).sum();
                s[c * modes + m] = coeff * self.fact[m];
            }
        }
        s
    }

    pub fn forward(&self, h: &Tensor, weights: &Tensor) -> Result<Tensor> {
        let (batch, width, n) = self.dims(h, weights)?;
        let modes = self.fact.len();
        let n_eval = self.eval_nodes.len();
        let wd = weights.data();
        let mut out = vec![0.0; batch * width * n_eval];
        let mut mixed = vec![0.0; modes];
        for b in 0..batch {
            let s = self.spectrum(&h.data()[b * width * n..(b + 1) * width * n], width, n);
            let ob = &mut out[b * width * n_eval..(b + 1) * width * n_eval];
            for o in 0..width {
                for m in 0..modes {
                    let wm = &wd[(m * width + o) * width..(m * width + o + 1) * width];
                    let acc: f64 = (0..width).map(|c| wm[c] * s[c * modes + m]).sum();
                    mixed[m] = acc / self.fact[m];
                }
                for (j, &z) in self.eval_nodes.iter().enumerate() {
                    ob[o * n_eval + j] = crate::polycore::horner(&mixed, z);
                }
            }
        }
        Tensor::from_vec(&[batch, width, n_eval], out)
    }
}

impl CustomOp for SpectralConv {
    fn backward(&self, inputs: &[&Tensor], _output: &Tensor, grad_out: &Tensor) -> Result<Vec<Option<Tensor>>> {
        let (h, weights) = (inputs[0], inputs[1]);
        let (batch, width, n) = self.dims(h, weights)?;
        let modes = self.fact.len();
        let n_eval = self.eval_nodes.len();
        let wd = weights.data();
        let pinv = self.fitop.pinv.as_slice();
        let mut dh = vec![0.0; h.len()];
        let mut dw = vec![0.0; weights.len()];
        let mut d_mixed = vec![0.0; width * modes];
        let mut d_spec = vec![0.0; width * modes];
        for b in 0..batch {
            let s = self.spectrum(&h.data()[b * width * n..(b + 1) * width * n], width, n);
            let g = &grad_out.data()[b * width * n_eval..(b + 1) * width * n_eval];
            // d(mixed)[o][m] = Σ_j g[o][j] z_j^m / m!
            for o in 0..width {
                let go = &g[o * n_eval..(o + 1) * n_eval];
                for m in 0..modes {
                    let mut acc = 0.0;
                    for (j, gv) in go.iter().enumerate() {
                        acc += gv * self.eval_powers[j * modes + m];
                    }
                    d_mixed[o * modes + m] = acc / self.fact[m];
                }
            }
            d_spec.iter_mut().for_each(|v| *v = 0.0);
            for m in 0..modes {
                for o in 0..width {
                    let dm = d_mixed[o * modes + m];
                    let base = (m * width + o) * width;
                    for c in 0..width {
                        dw[base + c] += dm * s[c * modes + m];
                        d_spec[c * modes + m] += wd[base + c] * dm;
                    }
                }
            }
            let dhb = &mut dh[b * width * n..(b + 1) * width * n];
            for c in 0..width {
                let dhc = &mut dhb[c * n..(c + 1) * n];
                for m in 0..modes {
                    let dc = d_spec[c * modes + m] * self.fact[m];
                    for (d, p) in dhc.iter_mut().zip(&pinv[m * n..(m + 1) * n]) {
                        *d += dc * p;
                    }
                }
            }
        }
        Ok(vec![
            Some(Tensor::from_vec(h.shape(), dh)?),
            Some(Tensor::from_vec(weights.shape(), dw)?),
        ])
    }
}

/// Convenience: spectral path evaluated back on the fitting grid.
pub fn spectral_path(h: &Tensor, weights: &Tensor, fitop: Arc<FitOperator>) -> Result<Tensor> {
    let nodes = fitop.nodes.clone();
    SpectralConv::new(fitop, nodes).forward(h, weights)
}
