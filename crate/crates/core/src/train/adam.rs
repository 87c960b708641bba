//! Adam optimizer over any [`Parameters`] implementor.

use nalgebra::DMatrix;

use crate::error::Result;
use crate::neural::Parameters;

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

/// First and second moments, one pair per parameter tensor.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AdamState {
    pub step: u64,
    pub m: Vec<DMatrix<f64>>,
    pub v: Vec<DMatrix<f64>>,
}

impl AdamState {
    pub fn new<M: Parameters>(model: &M) -> Self {
        let zeros: Vec<_> = model.params().iter().map(|(_, p)| DMatrix::zeros(p.value.nrows(), p.value.ncols())).collect();
        Self { step: 0, m: zeros.clone(), v: zeros }
    }
}

/// One bias-corrected Adam update using the gradients stored in `model`.
/// Non-finite gradients abort before anything is modified.
pub fn adam_step<M: Parameters>(model: &mut M, state: &mut AdamState, lr: f64) -> Result<()> {
    for (name, p) in model.params() {
        if p.grad.iter().any(|g| !g.is_finite()) {
            return Err(crate::Error::NonFiniteGradient(name));
        }
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - BETA1.powi(t);
    let c2 = 1.0 - BETA2.powi(t);
    for (i, (_, p)) in model.params_mut().into_iter().enumerate() {
        let (m, v) = (&mut state.m[i], &mut state.v[i]);
        for k in 0..p.value.len() {
            let g = p.grad[k];
            m[k] = BETA1 * m[k] + (1.0 - BETA1) * g;
            v[k] = BETA2 * v[k] + (1.0 - BETA2) * g * g;
            let m_hat = m[k] / c1;
            let v_hat = v[k] / c2;
            p.value[k] -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
        }
    }
    Ok(())
}
