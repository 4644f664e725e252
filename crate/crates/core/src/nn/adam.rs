use super::params::ParamStore;
use super::tensor::Tensor;
use crate::{Error, Result};

/// Adam moments and hyperparameters.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    m: Vec<Tensor>,
    v: Vec<Tensor>,
}

impl AdamState {
    /// Moments shaped after `params`; β1 = 0.9, β2 = 0.999, ε = 1e-8.
    pub fn new(params: &ParamStore, lr: f64) -> Self {
        let zeros: Vec<Tensor> = params.ids().map(|id| Tensor::zeros(params.value(id).shape())).collect();
        Self { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, step: 0, m: zeros.clone(), v: zeros }
    }
}

/// One bias-corrected Adam update; zeroes the gradients afterwards.
pub fn adam_step(params: &mut ParamStore, state: &mut AdamState) -> Result<()> {
    if let Some(name) = params.missing_grad() {
        return Err(Error::GradientMissing(name.to_owned()));
    }
    if state.m.len() != params.len() {
        return Err(Error::ShapeMismatch(format!(
            "optimizer tracks {} parameters, store has {}",
            state.m.len(),
            params.len()
        )));
    }
    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);
    let (b1, b2, lr, eps) = (state.beta1, state.beta2, state.lr, state.eps);
    let (values, grads) = params.values_and_grads_mut();
    for (((w, g), m), v) in values.iter_mut().zip(grads).zip(&mut state.m).zip(&mut state.v) {
        for (((w, &g), m), v) in w
            .data_mut()
            .iter_mut()
            .zip(g.data())
            .zip(m.data_mut())
            .zip(v.data_mut())
        {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *w -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    for id in params.ids().collect::<Vec<_>>() {
        params.value(id).ensure_finite(params.name(id))?;
    }
    params.zero_grad();
    Ok(())
}
