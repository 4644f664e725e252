use super::tensor::Tensor;
use crate::{Error, Result};

fn check_linear(x: &Tensor, w: &Tensor, bias: &Tensor) -> Result<(usize, usize, usize, usize)> {
    if x.shape().len() < 2 || w.shape().len() != 2 || bias.shape().len() != 1 {
        return Err(Error::ShapeMismatch(format!(
            "linear expects x [b, c_in, ...], W [c_out, c_in], bias [c_out]; got {:?}, {:?}, {:?}",
            x.shape(),
            w.shape(),
            bias.shape()
        )));
    }
    let (c_out, c_in) = (w.shape()[0], w.shape()[1]);
    if x.shape()[1] != c_in || bias.shape()[0] != c_out {
        return Err(Error::ShapeMismatch(format!(
            "linear channels: x {:?}, W {:?}, bias {:?}",
            x.shape(),
            w.shape(),
            bias.shape()
        )));
    }
    Ok((x.shape()[0], c_in, c_out, x.spatial_len()))
}

/// Pointwise channel mixing (1x1 convolution): `y[b,o,s] = Σ_i W[o,i] x[b,i,s] + bias[o]`.
pub fn linear(x: &Tensor, w: &Tensor, bias: &Tensor) -> Result<Tensor> {
    let (batch, c_in, c_out, m) = check_linear(x, w, bias)?;
    let mut shape = x.shape().to_vec();
    shape[1] = c_out;
    let mut out = vec![0.0; batch * c_out * m];
    let (xd, wd, bd) = (x.data(), w.data(), bias.data());
    for b in 0..batch {
        let xb = &xd[b * c_in * m..(b + 1) * c_in * m];
        let ob = &mut out[b * c_out * m..(b + 1) * c_out * m];
        for o in 0..c_out {
            let row = &mut ob[o * m..(o + 1) * m];
            row.iter_mut().for_each(|v| *v = bd[o]);
            for i in 0..c_in {
                let wv = wd[o * c_in + i];
                for (r, xv) in row.iter_mut().zip(&xb[i * m..(i + 1) * m]) {
                    *r += wv * xv;
                }
            }
        }
    }
    Tensor::from_vec(&shape, out)
}

/// Returns `(dx, dW, dbias)` for [`linear`].
pub fn linear_backward(x: &Tensor, w: &Tensor, grad_out: &Tensor) -> Result<(Tensor, Tensor, Tensor)> {
    let c_out = w.shape()[0];
    let bias = Tensor::zeros(&[c_out]);
    let (batch, c_in, _, m) = check_linear(x, w, &bias)?;
    if grad_out.shape()[0] != batch || grad_out.shape()[1] != c_out || grad_out.spatial_len() != m {
        return Err(Error::ShapeMismatch(format!(
            "linear backward: grad {:?} vs x {:?}",
            grad_out.shape(),
            x.shape()
        )));
    }
    let mut dx = vec![0.0; x.len()];
    let mut dw = vec![0.0; w.len()];
    let mut db = vec![0.0; c_out];
    let (xd, wd, gd) = (x.data(), w.data(), grad_out.data());
    for b in 0..batch {
        let xb = &xd[b * c_in * m..(b + 1) * c_in * m];
        let gb = &gd[b * c_out * m..(b + 1) * c_out * m];
        let dxb = &mut dx[b * c_in * m..(b + 1) * c_in * m];
        for o in 0..c_out {
            let g = &gb[o * m..(o + 1) * m];
            db[o] += g.iter().sum::<f64>();
            for i in 0..c_in {
                let xi = &xb[i * m..(i + 1) * m];
                dw[o * c_in + i] += g.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>();
                let wv = wd[o * c_in + i];
                for (d, gv) in dxb[i * m..(i + 1) * m].iter_mut().zip(g) {
                    *d += wv * gv;
                }
            }
        }
    }
    Ok((
        Tensor::from_vec(x.shape(), dx)?,
        Tensor::from_vec(w.shape(), dw)?,
        Tensor::from_vec(&[c_out], db)?,
    ))
}

const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;
const GELU_CUBIC: f64 = 0.044_715;

/// Gaussian-gated unit `x Φ(x)` with the tanh approximation of `Φ`.
#[inline]
pub fn gelu(x: f64) -> f64 {
    let t = (SQRT_2_OVER_PI * (x + GELU_CUBIC * x * x * x)).tanh();
    0.5 * x * (1.0 + t)
}

#[inline]
pub fn activation_grad(x: f64) -> f64 {
    let u = SQRT_2_OVER_PI * (x + GELU_CUBIC * x * x * x);
    let t = u.tanh();
    let du = SQRT_2_OVER_PI * (1.0 + 3.0 * GELU_CUBIC * x * x);
    0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du
}

pub fn activation(x: &Tensor) -> Tensor {
    let data = x.data().iter().map(|&v| gelu(v)).collect();
    Tensor::from_vec(x.shape(), data).expect("same shape")
}

pub fn activation_backward(x: &Tensor, grad_out: &Tensor) -> Tensor {
    let data = x
        .data()
        .iter()
        .zip(grad_out.data())
        .map(|(&v, &g)| g * activation_grad(v))
        .collect();
    Tensor::from_vec(x.shape(), data).expect("same shape")
}

/// Mean over the batch of `‖pred_b − truth_b‖₂ / ‖truth_b‖₂`, with its
/// gradient with respect to `pred`.
pub fn rel_l2_loss(pred: &Tensor, truth: &Tensor) -> Result<(f64, Tensor)> {
    if pred.shape() != truth.shape() || pred.shape().is_empty() {
        return Err(Error::ShapeMismatch(format!(
            "loss: pred {:?} vs truth {:?}",
            pred.shape(),
            truth.shape()
        )));
    }
    let batch = pred.shape()[0];
    let item = pred.len() / batch.max(1);
    let mut grad = vec![0.0; pred.len()];
    let mut total = 0.0;
    for b in 0..batch {
        let p = &pred.data()[b * item..(b + 1) * item];
        let t = &truth.data()[b * item..(b + 1) * item];
        let tn = t.iter().map(|v| v * v).sum::<f64>().sqrt();
        if tn == 0.0 {
            return Err(Error::ZeroTarget(b));
        }
        let rn = p.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        total += rn / tn;
        if rn > 0.0 {
            let scale = 1.0 / (rn * tn * batch as f64);
            for ((g, a), b) in grad[b * item..(b + 1) * item].iter_mut().zip(p).zip(t) {
                *g = (a - b) * scale;
            }
        }
    }
    let loss = total / batch as f64;
    if !loss.is_finite() {
        return Err(Error::NumericalFault(format!("non-finite loss {loss}")));
    }
    Ok((loss, Tensor::from_vec(pred.shape(), grad)?))
}
