//! Cosine similarity and the two-term InfoNCE objective with analytic gradients.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Lower bound applied to vector norms before dividing.
pub const NORM_FLOOR: f64 = 1e-12;

/// `a . b / (|a| |b|)` with norms floored at [`NORM_FLOOR`].
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(NORM_FLOOR);
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt().max(NORM_FLOOR);
    dot / (na * nb)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossValue {
    pub inter: f64,
    pub intra: f64,
    pub total: f64,
}

/// Loss value together with gradients with respect to both embedding matrices.
#[derive(Clone, Debug)]
pub struct LossGrad {
    pub value: LossValue,
    pub d_e1: DMatrix<f64>,
    pub d_e2: DMatrix<f64>,
}

fn normalize_rows(e: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let norms = DVector::from_fn(e.nrows(), |i, _| e.row(i).norm().max(NORM_FLOOR));
    let mut z = e.clone();
    for (i, mut row) in z.row_iter_mut().enumerate() {
        row /= norms[i];
    }
    (z, norms)
}

/// Backpropagates through row normalization.
fn normalize_backward(e: &DMatrix<f64>, z: &DMatrix<f64>, norms: &DVector<f64>, dz: &DMatrix<f64>) -> DMatrix<f64> {
    let mut de = DMatrix::zeros(e.nrows(), e.ncols());
    for i in 0..e.nrows() {
        let g = dz.row(i);
        if e.row(i).norm() > NORM_FLOOR {
            let zi = z.row(i);
            de.row_mut(i).copy_from(&((g - zi * zi.dot(&g)) / norms[i]));
        } else {
            de.row_mut(i).copy_from(&(g / NORM_FLOOR));
        }
    }
    de
}

/// Row-wise log-sum-exp and softmax of `s`, skipping the diagonal when `skip_diag`.
fn lse_softmax(s: &DMatrix<f64>, skip_diag: bool) -> (DVector<f64>, DMatrix<f64>) {
    let n = s.nrows();
    let mut lse = DVector::zeros(n);
    let mut soft = DMatrix::zeros(n, s.ncols());
    for i in 0..n {
        let keep = |j: usize| !(skip_diag && i == j);
        let max = (0..s.ncols()).filter(|&j| keep(j)).map(|j| s[(i, j)]).fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for j in (0..s.ncols()).filter(|&j| keep(j)) {
            let w = (s[(i, j)] - max).exp();
            soft[(i, j)] = w;
            sum += w;
        }
        for j in 0..s.ncols() {
            soft[(i, j)] /= sum;
        }
        lse[i] = max + sum.ln();
    }
    (lse, soft)
}

/// `L_inter = -(1/n) sum_i log softmax_j(S(h_i^1, h_j^2)/tau)_i` and
/// `L_intra = (1/2n) sum_k sum_i log sum_{j != i} exp(S(h_i^k, h_j^k)/tau)`.
pub fn info_nce_grad(e1: &DMatrix<f64>, e2: &DMatrix<f64>, tau: f64) -> Result<LossGrad> {
    if e1.shape() != e2.shape() {
        return Err(Error::Shape(format!("view embeddings {:?} and {:?}", e1.shape(), e2.shape())));
    }
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument(format!("tau must be > 0, got {tau}")));
    }
    let n = e1.nrows();
    if n < 2 {
        return Err(Error::IntraUndefined);
    }
    let nf = n as f64;
    let (z1, n1) = normalize_rows(e1);
    let (z2, n2) = normalize_rows(e2);

    let s12 = (&z1 * z2.transpose()) / tau;
    let (lse12, soft12) = lse_softmax(&s12, false);
    let inter = (0..n).map(|i| lse12[i] - s12[(i, i)]).sum::<f64>() / nf;
    let mut g12 = soft12;
    for i in 0..n {
        g12[(i, i)] -= 1.0;
    }
    g12 /= nf * tau;

    let mut intra = 0.0;
    let mut grads = Vec::with_capacity(2);
    for z in [&z1, &z2] {
        let s = (z * z.transpose()) / tau;
        let (lse, soft) = lse_softmax(&s, true);
        intra += lse.sum();
        let g = soft / (2.0 * nf * tau);
        grads.push(&g + g.transpose());
    }
    intra /= 2.0 * nf;

    let dz1 = &g12 * &z2 + &grads[0] * &z1;
    let dz2 = g12.transpose() * &z1 + &grads[1] * &z2;
    Ok(LossGrad {
        value: LossValue { inter, intra, total: inter + intra },
        d_e1: normalize_backward(e1, &z1, &n1, &dz1),
        d_e2: normalize_backward(e2, &z2, &n2, &dz2),
    })
}

/// Loss value only.
pub fn info_nce(e1: &DMatrix<f64>, e2: &DMatrix<f64>, tau: f64) -> Result<LossValue> {
    info_nce_grad(e1, e2, tau).map(|g| g.value)
}
