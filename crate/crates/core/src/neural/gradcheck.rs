//! Finite-difference gradient verification.

use super::tensor::Parameters;

/// Default central-difference step.
pub const GRADCHECK_EPS: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct TensorCheck {
    pub name: String,
    pub analytic_norm: f64,
    pub numeric_norm: f64,
    pub relative_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub tensors: Vec<TensorCheck>,
    pub max_relative_error: f64,
}

/// Compares analytic gradients with central differences, tensor by tensor,
/// using `|a - f| / max(|a|, |f|)` (zero when both vanish).
///
/// `loss_grad` must zero and refill the gradients; `loss` must not touch them.
pub fn gradient_check<M, L, G>(model: &mut M, loss: L, mut loss_grad: G, eps: f64) -> GradCheckReport
where
    M: Parameters,
    L: Fn(&M) -> f64,
    G: FnMut(&mut M) -> f64,
{
    loss_grad(model);
    let analytic: Vec<(String, Vec<f64>)> =
        model.params().into_iter().map(|(name, p)| (name, p.grad.as_slice().to_vec())).collect();

    let mut tensors = Vec::with_capacity(analytic.len());
    for (index, (name, grad)) in analytic.into_iter().enumerate() {
        let mut numeric = vec![0.0; grad.len()];
        for (k, slot) in numeric.iter_mut().enumerate() {
            let original = nth_value(model, index, k);
            set_nth_value(model, index, k, original + eps);
            let plus = loss(model);
            set_nth_value(model, index, k, original - eps);
            let minus = loss(model);
            set_nth_value(model, index, k, original);
            *slot = (plus - minus) / (2.0 * eps);
        }
        let analytic_norm = norm(&grad);
        let numeric_norm = norm(&numeric);
        let diff = grad.iter().zip(&numeric).map(|(a, f)| (a - f).powi(2)).sum::<f64>().sqrt();
        let scale = analytic_norm.max(numeric_norm);
        let relative_error = if scale == 0.0 { 0.0 } else { diff / scale };
        tensors.push(TensorCheck { name, analytic_norm, numeric_norm, relative_error });
    }
    let max_relative_error = tensors.iter().map(|t| t.relative_error).fold(0.0, f64::max);
    GradCheckReport { tensors, max_relative_error }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn nth_value<M: Parameters>(model: &M, tensor: usize, k: usize) -> f64 {
    model.params()[tensor].1.value.as_slice()[k]
}

fn set_nth_value<M: Parameters>(model: &mut M, tensor: usize, k: usize, v: f64) {
    model.params_mut()[tensor].1.value.as_mut_slice()[k] = v;
}
