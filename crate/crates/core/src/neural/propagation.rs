//! Parameter-free complex feature propagation.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the complex operator mixes the two feature channels.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PropagationMode {
    /// Full complex product: `Re' = Re(P) Re - Im(P) Im`, `Im' = Re(P) Im + Im(P) Re`.
    #[default]
    Complex,
    /// Channel-wise: `Re' = Re(P) Re`, `Im' = Im(P) Im`.
    Split,
}

impl PropagationMode {
    pub fn name(self) -> &'static str {
        match self {
            PropagationMode::Complex => "complex",
            PropagationMode::Split => "split",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "complex" => Ok(PropagationMode::Complex),
            "split" => Ok(PropagationMode::Split),
            other => Err(Error::Config(format!("unknown propagation mode `{other}`"))),
        }
    }
}

/// `P = D~^{-1/2} (A_s + I) D~^{-1/2} ⊙ exp(i Theta)`, stored as real and imaginary parts.
#[derive(Clone, Debug, PartialEq)]
pub struct PropagationOperator {
    pub re: DMatrix<f64>,
    pub im: DMatrix<f64>,
}

impl PropagationOperator {
    /// Degrees of `A_s + I` are floored at 1.
    pub fn new(a_s: &DMatrix<f64>, d_s: &DVector<f64>, theta: &DMatrix<f64>) -> Result<Self> {
        let n = a_s.nrows();
        if a_s.shape() != (n, n) || theta.shape() != (n, n) || d_s.len() != n {
            return Err(Error::Shape(format!("A_s {:?}, Theta {:?}, D_s {}", a_s.shape(), theta.shape(), d_s.len())));
        }
        let scale: Vec<f64> = d_s.iter().map(|d| 1.0 / (d + 1.0).max(1.0).sqrt()).collect();
        let mut re = DMatrix::zeros(n, n);
        let mut im = DMatrix::zeros(n, n);
        for u in 0..n {
            for v in 0..n {
                let w = a_s[(u, v)] + if u == v { 1.0 } else { 0.0 };
                if w != 0.0 {
                    let m = scale[u] * w * scale[v];
                    let t = theta[(u, v)];
                    re[(u, v)] = m * t.cos();
                    im[(u, v)] = m * t.sin();
                }
            }
        }
        Ok(Self { re, im })
    }

    pub fn order(&self) -> usize {
        self.re.nrows()
    }

    /// Applies `layers` propagation steps to `(real, imag)`.
    pub fn propagate(
        &self,
        real: &DMatrix<f64>,
        imag: &DMatrix<f64>,
        layers: usize,
        mode: PropagationMode,
    ) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        if real.nrows() != self.order() || imag.shape() != real.shape() {
            return Err(Error::Shape(format!(
                "operator order {}, channels {:?} and {:?}",
                self.order(),
                real.shape(),
                imag.shape()
            )));
        }
        let (mut x_re, mut x_im) = (real.clone(), imag.clone());
        for _ in 0..layers {
            let (next_re, next_im) = match mode {
                PropagationMode::Complex => {
                    (&self.re * &x_re - &self.im * &x_im, &self.re * &x_im + &self.im * &x_re)
                }
                PropagationMode::Split => (&self.re * &x_re, &self.im * &x_im),
            };
            x_re = next_re;
            x_im = next_im;
        }
        Ok((x_re, x_im))
    }
}
