//! Parameter tensors with paired gradient buffers, and small matrix helpers.

use nalgebra::DMatrix;
use rand::Rng;

/// A trainable tensor and its gradient buffer.
#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub value: DMatrix<f64>,
    pub grad: DMatrix<f64>,
}

impl Param {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { value: DMatrix::zeros(rows, cols), grad: DMatrix::zeros(rows, cols) }
    }

    /// Uniform in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`.
    pub fn uniform<R: Rng>(rows: usize, cols: usize, fan_in: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
        let value = DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-bound..=bound));
        Self { value, grad: DMatrix::zeros(rows, cols) }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.value.shape()
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill(0.0);
    }
}

/// Anything that exposes named parameters.
pub trait Parameters {
    fn params(&self) -> Vec<(String, &Param)>;
    fn params_mut(&mut self) -> Vec<(String, &mut Param)>;

    fn zero_grad(&mut self) {
        for (_, p) in self.params_mut() {
            p.zero_grad();
        }
    }

    fn parameter_count(&self) -> usize {
        self.params().iter().map(|(_, p)| p.value.len()).sum()
    }
}

/// `[a | b]`.
pub fn hcat(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.nrows(), b.nrows());
    let mut out = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

/// Splits columns at `at`.
pub fn hsplit(m: &DMatrix<f64>, at: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    (m.columns(0, at).into_owned(), m.columns(at, m.ncols() - at).into_owned())
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
