//! Bias-free gated recurrent unit that encodes one walk per node.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::tensor::{hcat, sigmoid, Param, Parameters};
use crate::error::{Error, Result};
use crate::graph::NodeId;

/// Gates act on `[h, x]`; each weight is stored `(hidden + input) x hidden`.
#[derive(Clone, Debug, PartialEq)]
pub struct Gru {
    pub w_update: Param,
    pub w_reset: Param,
    pub w_candidate: Param,
    hidden: usize,
    input: usize,
}

#[derive(Clone, Debug)]
struct StepCache {
    h_prev: DMatrix<f64>,
    a: DMatrix<f64>,
    c: DMatrix<f64>,
    z: DMatrix<f64>,
    r: DMatrix<f64>,
    h_cand: DMatrix<f64>,
    active: Vec<bool>,
}

/// Forward intermediates needed by [`Gru::backward`].
#[derive(Clone, Debug)]
pub struct GruCache {
    steps: Vec<StepCache>,
    paths: Vec<Vec<NodeId>>,
}

impl Gru {
    pub fn new<R: Rng>(input: usize, hidden: usize, rng: &mut R) -> Self {
        let fan_in = hidden + input;
        Self {
            w_update: Param::uniform(fan_in, hidden, fan_in, rng),
            w_reset: Param::uniform(fan_in, hidden, fan_in, rng),
            w_candidate: Param::uniform(fan_in, hidden, fan_in, rng),
            hidden,
            input,
        }
    }

    pub fn zeros(input: usize, hidden: usize) -> Self {
        let fan_in = hidden + input;
        Self {
            w_update: Param::zeros(fan_in, hidden),
            w_reset: Param::zeros(fan_in, hidden),
            w_candidate: Param::zeros(fan_in, hidden),
            hidden,
            input,
        }
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden
    }

    pub fn input_dim(&self) -> usize {
        self.input
    }

    fn forward_step(&self, h: &DMatrix<f64>, x: &DMatrix<f64>, active: Vec<bool>) -> (DMatrix<f64>, StepCache) {
        let a = hcat(h, x);
        let z = (&a * &self.w_update.value).map(sigmoid);
        let r = (&a * &self.w_reset.value).map(sigmoid);
        let c = hcat(&r.component_mul(h), x);
        let h_cand = (&c * &self.w_candidate.value).map(f64::tanh);
        let mut h_next = h.clone();
        for (i, &on) in active.iter().enumerate() {
            if on {
                for j in 0..self.hidden {
                    h_next[(i, j)] = (1.0 - z[(i, j)]) * h[(i, j)] + z[(i, j)] * h_cand[(i, j)];
                }
            }
        }
        (h_next, StepCache { h_prev: h.clone(), a, c, z, r, h_cand, active })
    }

    /// One update for a single state vector.
    pub fn step(&self, h: &DVector<f64>, x: &DVector<f64>) -> DVector<f64> {
        let h = DMatrix::from_row_slice(1, self.hidden, h.as_slice());
        let x = DMatrix::from_row_slice(1, self.input, x.as_slice());
        let (next, _) = self.forward_step(&h, &x, vec![true]);
        DVector::from_row_slice(next.as_slice())
    }

    /// Runs every path from a zero state and returns the final states, one row per path.
    /// Paths shorter than the longest are held fixed after their last node.
    pub fn forward(&self, paths: &[Vec<NodeId>], features: &DMatrix<f64>) -> Result<(DMatrix<f64>, GruCache)> {
        if features.ncols() != self.input {
            return Err(Error::Shape(format!("GRU expects input width {}, got {}", self.input, features.ncols())));
        }
        if let Some(&bad) = paths.iter().flatten().find(|&&v| v >= features.nrows()) {
            return Err(Error::Shape(format!("path node {bad} has no feature row")));
        }
        let batch = paths.len();
        let steps = paths.iter().map(Vec::len).max().unwrap_or(0);
        let mut h = DMatrix::zeros(batch, self.hidden);
        let mut cache = Vec::with_capacity(steps);
        for t in 0..steps {
            let mut x = DMatrix::zeros(batch, self.input);
            let mut active = vec![false; batch];
            for (i, path) in paths.iter().enumerate() {
                if let Some(&v) = path.get(t) {
                    x.row_mut(i).copy_from(&features.row(v));
                    active[i] = true;
                }
            }
            let (next, step) = self.forward_step(&h, &x, active);
            cache.push(step);
            h = next;
        }
        Ok((h, GruCache { steps: cache, paths: paths.to_vec() }))
    }

    /// Backpropagates through time, accumulating weight gradients.
    /// Returns the gradient with respect to the feature matrix of `n` rows.
    pub fn backward(&mut self, cache: &GruCache, d_out: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
        let hd = self.hidden;
        let mut d_features = DMatrix::zeros(n, self.input);
        let mut dh = d_out.clone();
        for (t, s) in cache.steps.iter().enumerate().rev() {
            let mut dh_act = dh.clone();
            let mut dh_prev = DMatrix::zeros(dh.nrows(), hd);
            for (i, &on) in s.active.iter().enumerate() {
                if !on {
                    dh_prev.row_mut(i).copy_from(&dh.row(i));
                    dh_act.row_mut(i).fill(0.0);
                }
            }
            let dz = dh_act.component_mul(&(&s.h_cand - &s.h_prev));
            let d_cand = dh_act.component_mul(&s.z);
            dh_prev += dh_act.component_mul(&s.z.map(|z| 1.0 - z));

            let dp_cand = d_cand.zip_map(&s.h_cand, |g, y| g * (1.0 - y * y));
            self.w_candidate.grad += s.c.transpose() * &dp_cand;
            let dc = &dp_cand * self.w_candidate.value.transpose();
            let d_rh = dc.columns(0, hd).into_owned();
            let dr = d_rh.component_mul(&s.h_prev);
            dh_prev += d_rh.component_mul(&s.r);

            let dp_z = dz.zip_map(&s.z, |g, z| g * z * (1.0 - z));
            let dp_r = dr.zip_map(&s.r, |g, r| g * r * (1.0 - r));
            self.w_update.grad += s.a.transpose() * &dp_z;
            self.w_reset.grad += s.a.transpose() * &dp_r;
            let da = &dp_z * self.w_update.value.transpose() + &dp_r * self.w_reset.value.transpose();
            dh_prev += da.columns(0, hd);

            let dx = da.columns(hd, self.input) + dc.columns(hd, self.input);
            for (i, path) in cache.paths.iter().enumerate() {
                if let Some(&v) = path.get(t) {
                    let mut row = d_features.row_mut(v);
                    row += dx.row(i);
                }
            }
            dh = dh_prev;
        }
        d_features
    }

    pub(crate) fn named<'a>(&'a self, prefix: &str) -> Vec<(String, &'a Param)> {
        vec![
            (format!("{prefix}.w_update"), &self.w_update),
            (format!("{prefix}.w_reset"), &self.w_reset),
            (format!("{prefix}.w_candidate"), &self.w_candidate),
        ]
    }

    pub(crate) fn named_mut<'a>(&'a mut self, prefix: &str) -> Vec<(String, &'a mut Param)> {
        vec![
            (format!("{prefix}.w_update"), &mut self.w_update),
            (format!("{prefix}.w_reset"), &mut self.w_reset),
            (format!("{prefix}.w_candidate"), &mut self.w_candidate),
        ]
    }
}

impl Parameters for Gru {
    fn params(&self) -> Vec<(String, &Param)> {
        self.named("gru")
    }

    fn params_mut(&mut self) -> Vec<(String, &mut Param)> {
        self.named_mut("gru")
    }
}
