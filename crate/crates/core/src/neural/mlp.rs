//! Two-layer perceptron used for the node readout and the projection head.

use nalgebra::DMatrix;
use rand::Rng;

use super::tensor::{Param, Parameters};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    /// No nonlinearity; used to test affine behavior.
    Identity,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the activation output.
    fn grad_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Identity => 1.0,
        }
    }
}

/// `y = x W + b` with `W` stored `in x out`.
#[derive(Clone, Debug, PartialEq)]
pub struct Linear {
    pub weight: Param,
    pub bias: Param,
}

impl Linear {
    pub fn new<R: Rng>(input: usize, output: usize, rng: &mut R) -> Self {
        Self {
            weight: Param::uniform(input, output, input, rng),
            bias: Param::uniform(1, output, input, rng),
        }
    }

    pub fn zeros(input: usize, output: usize) -> Self {
        Self { weight: Param::zeros(input, output), bias: Param::zeros(1, output) }
    }

    pub fn input_dim(&self) -> usize {
        self.weight.value.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.weight.value.ncols()
    }

    pub fn forward(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut y = x * &self.weight.value;
        for mut row in y.row_iter_mut() {
            row += &self.bias.value;
        }
        y
    }

    /// Accumulates parameter gradients and returns `dL/dx`.
    pub fn backward(&mut self, x: &DMatrix<f64>, dy: &DMatrix<f64>) -> DMatrix<f64> {
        self.weight.grad += x.transpose() * dy;
        self.bias.grad += dy.row_sum();
        dy * self.weight.value.transpose()
    }
}

/// `act(x W1 + b1) W2 + b2`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    pub hidden: Linear,
    pub output: Linear,
    pub activation: Activation,
}

/// Forward intermediates needed by [`Mlp::backward`].
#[derive(Clone, Debug)]
pub struct MlpCache {
    input: DMatrix<f64>,
    hidden: DMatrix<f64>,
}

impl Mlp {
    pub fn new<R: Rng>(input: usize, hidden: usize, output: usize, rng: &mut R) -> Self {
        Self {
            hidden: Linear::new(input, hidden, rng),
            output: Linear::new(hidden, output, rng),
            activation: Activation::Tanh,
        }
    }

    pub fn zeros(input: usize, hidden: usize, output: usize) -> Self {
        Self { hidden: Linear::zeros(input, hidden), output: Linear::zeros(hidden, output), activation: Activation::Tanh }
    }

    pub fn input_dim(&self) -> usize {
        self.hidden.input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.output.output_dim()
    }

    pub fn forward(&self, x: &DMatrix<f64>) -> Result<(DMatrix<f64>, MlpCache)> {
        if x.ncols() != self.input_dim() {
            return Err(Error::Shape(format!("MLP expects width {}, got {}", self.input_dim(), x.ncols())));
        }
        let act = self.activation;
        let hidden = self.hidden.forward(x).map(|v| act.apply(v));
        let out = self.output.forward(&hidden);
        Ok((out, MlpCache { input: x.clone(), hidden }))
    }

    pub fn backward(&mut self, cache: &MlpCache, dy: &DMatrix<f64>) -> DMatrix<f64> {
        let dh = self.output.backward(&cache.hidden, dy);
        let act = self.activation;
        let dpre = dh.zip_map(&cache.hidden, |g, h| g * act.grad_from_output(h));
        self.hidden.backward(&cache.input, &dpre)
    }

    pub(crate) fn named<'a>(&'a self, prefix: &str) -> Vec<(String, &'a Param)> {
        vec![
            (format!("{prefix}.hidden.weight"), &self.hidden.weight),
            (format!("{prefix}.hidden.bias"), &self.hidden.bias),
            (format!("{prefix}.output.weight"), &self.output.weight),
            (format!("{prefix}.output.bias"), &self.output.bias),
        ]
    }

    pub(crate) fn named_mut<'a>(&'a mut self, prefix: &str) -> Vec<(String, &'a mut Param)> {
        vec![
            (format!("{prefix}.hidden.weight"), &mut self.hidden.weight),
            (format!("{prefix}.hidden.bias"), &mut self.hidden.bias),
            (format!("{prefix}.output.weight"), &mut self.output.weight),
            (format!("{prefix}.output.bias"), &mut self.output.bias),
        ]
    }
}

impl Parameters for Mlp {
    fn params(&self) -> Vec<(String, &Param)> {
        self.named("mlp")
    }

    fn params_mut(&mut self) -> Vec<(String, &mut Param)> {
        self.named_mut("mlp")
    }
}
