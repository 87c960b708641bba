//! Dense eigendecomposition: cyclic Jacobi for real symmetric matrices, and
//! Hermitian matrices through their real symmetric `2n x 2n` embedding
//! `[[Re H, -Im H], [Im H, Re H]]`, whose spectrum is that of `H` doubled.

use nalgebra::{DMatrix, DVector};

use super::hermitian::{hermitian_deviation, HermitianMatrix, C64, HERMITIAN_TOL};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigenpairs of a real symmetric matrix, ascending.
///
/// Columns of the returned matrix are orthonormal eigenvectors.
pub fn jacobi_eigh(a: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = a.nrows();
    assert!(a.is_square());
    // row-major working copies
    let mut m: Vec<f64> = (0..n * n).map(|k| a[(k / n, k % n)]).collect();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale: f64 = m.iter().map(|x| x * x).sum::<f64>();
    let tiny = f64::EPSILON * f64::EPSILON * scale.max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j] * m[i * n + j])
            .sum();
        if off <= tiny {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // A' = J^T A J on rows/cols p, q
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].total_cmp(&m[j * n + j]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| m[i * n + i]));
    let vectors = DMatrix::from_fn(n, n, |r, c| v[r * n + order[c]]);
    (values, vectors)
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending eigenvalues.
    pub values: DVector<f64>,
    /// Unitary matrix whose columns are the matching eigenvectors.
    pub vectors: DMatrix<C64>,
}

impl HermitianEigen {
    /// `max |H V - V diag(lambda)|_F`.
    pub fn residual(&self, h: &HermitianMatrix) -> f64 {
        let lam = DMatrix::from_diagonal(&self.values.map(|x| C64::new(x, 0.0)));
        let r = h.matrix() * &self.vectors - &self.vectors * lam;
        r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `|V^H V - I|_F`.
    pub fn orthogonality_error(&self) -> f64 {
        let n = self.values.len();
        let g = self.vectors.adjoint() * &self.vectors - DMatrix::<C64>::identity(n, n);
        g.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Smallest gap between consecutive eigenvalues (infinite for order < 2).
    pub fn min_gap(&self) -> f64 {
        self.values
            .as_slice()
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }
}

/// Real symmetric embedding of a complex matrix.
pub fn real_embedding(h: &DMatrix<C64>) -> DMatrix<f64> {
    let n = h.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = h[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Eigenvalues only.
pub fn hermitian_eigenvalues(h: &HermitianMatrix) -> DVector<f64> {
    hermitian_eigh(h).values
}

/// Hermitian eigendecomposition via the real embedding.
///
/// Each eigenvalue of `H` appears twice in the embedding, with real
/// eigenvectors `[a; b]` and `[-b; a]` that map to the complex lines
/// `a + ib` and `i(a + ib)`. Eigenvalues are paired by sorted order and the
/// complex eigenvectors of every cluster are extracted by pivoted Gram-Schmidt.
pub fn hermitian_eigh(h: &HermitianMatrix) -> HermitianEigen {
    let n = h.order();
    if n == 0 {
        return HermitianEigen { values: DVector::zeros(0), vectors: DMatrix::zeros(0, 0) };
    }
    let (mu, w) = jacobi_eigh(&real_embedding(h.matrix()));
    let values = DVector::from_fn(n, |k, _| 0.5 * (mu[2 * k] + mu[2 * k + 1]));

    let scale = mu.iter().fold(0.0f64, |a, &x| a.max(x.abs())).max(1.0);
    let cluster_tol = 1e-8 * scale;
    let as_complex = |c: usize| -> DVector<C64> {
        DVector::from_fn(n, |r, _| C64::new(w[(r, c)], w[(r + n, c)]))
    };

    let mut vectors = DMatrix::<C64>::zeros(n, n);
    let mut col = 0;
    let mut start = 0;
    while start < 2 * n {
        let mut end = start + 1;
        while end < 2 * n && mu[end] - mu[end - 1] <= cluster_tol {
            end += 1;
        }
        // clusters should have even size; round down when noise splits a pair
        let want = ((end - start) / 2).min(n - col);
        let mut candidates: Vec<DVector<C64>> = (start..end).map(as_complex).collect();
        for _ in 0..want {
            let (best, _) = candidates
                .iter()
                .enumerate()
                .map(|(i, c)| (i, c.norm()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .expect("non-empty cluster");
            let mut q = candidates.swap_remove(best);
            let norm = q.norm();
            q /= C64::new(norm, 0.0);
            for c in candidates.iter_mut() {
                let proj = q.dotc(c);
                *c -= &q * proj;
            }
            vectors.set_column(col, &q);
            col += 1;
        }
        start = end;
    }
    // odd-sized clusters can leave columns unfilled; complete them with the
    // remaining embedding vectors orthogonalized against what we have
    if col < n {
        let mut pool: Vec<DVector<C64>> = (0..2 * n).map(as_complex).collect();
        while col < n {
            for c in pool.iter_mut() {
                for k in 0..col {
                    let q = vectors.column(k).into_owned();
                    let proj = q.dotc(c);
                    *c -= &q * proj;
                }
            }
            let (best, _) = pool
                .iter()
                .enumerate()
                .map(|(i, c)| (i, c.norm()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            let q = pool.swap_remove(best);
            let norm = q.norm();
            vectors.set_column(col, &(q / C64::new(norm, 0.0)));
            col += 1;
        }
    }
    HermitianEigen { values, vectors }
}

/// Checked variant for raw complex input.
pub fn hermitian_eigh_checked(m: &DMatrix<C64>) -> Result<HermitianEigen> {
    let deviation = hermitian_deviation(m);
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(hermitian_eigh(&HermitianMatrix::new(m.clone())?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Digraph;
    use crate::magnetic::charge::personalized_charge;
    use crate::magnetic::laplacian::personalized_laplacian;
    use rand::{Rng, SeedableRng};

    fn random_hermitian(n: usize, seed: u64) -> HermitianMatrix {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut m = DMatrix::<C64>::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(rng.random_range(-2.0..2.0), 0.0);
            for j in (i + 1)..n {
                let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        HermitianMatrix::new(m).unwrap()
    }

    #[test]
    fn zero_matrix() {
        let h = HermitianMatrix::new(DMatrix::zeros(4, 4)).unwrap();
        let e = hermitian_eigh(&h);
        assert_eq!(e.values.as_slice(), &[0.0; 4]);
        assert!(e.orthogonality_error() < 1e-12);
    }

    #[test]
    fn diagonal_matrix() {
        let mut m = DMatrix::<C64>::zeros(2, 2);
        m[(0, 0)] = C64::new(1.0, 0.0);
        m[(1, 1)] = C64::new(2.0, 0.0);
        let e = hermitian_eigh(&HermitianMatrix::new(m).unwrap());
        assert_eq!(e.values.as_slice(), &[1.0, 2.0]);
        // columns equal the identity up to a unit phase
        for k in 0..2 {
            assert!((e.vectors[(k, k)].norm() - 1.0).abs() < 1e-14);
            assert!(e.vectors[(1 - k, k)].norm() < 1e-14);
        }
    }

    #[test]
    fn three_cycle_personalized_reconstruction() {
        let g = Digraph::new(3, &[(0, 1), (1, 2), (2, 0)]);
        let cf = personalized_charge(&g, 0.25, false).unwrap();
        let l = personalized_laplacian(&g, &cf).unwrap();
        let e = hermitian_eigh(&l);
        assert!(e.residual(&l) < 1e-10);
        assert!(e.orthogonality_error() < 1e-10);
    }

    #[test]
    fn matches_closed_form_circulant_spectrum() {
        // directed 3-cycle with uniform charge q: eigenvalues 1 - cos(2 pi (k / 3 + q))
        let g = Digraph::new(3, &[(0, 1), (1, 2), (2, 0)]);
        let l = crate::magnetic::laplacian::magnetic_laplacian(&g, 0.1).unwrap();
        let e = hermitian_eigenvalues(&l);
        let mut expected: Vec<f64> = (0..3)
            .map(|k| 1.0 - (std::f64::consts::TAU * (k as f64 / 3.0 + 0.1)).cos())
            .collect();
        expected.sort_by(f64::total_cmp);
        for (a, b) in e.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-13, "{a} vs {b}");
        }
    }

    #[test]
    fn random_hermitian_residuals() {
        for seed in 0..20 {
            let h = random_hermitian(1 + (seed as usize % 9), seed);
            let e = hermitian_eigh(&h);
            let tol = 1e-8 * h.frobenius_norm().max(1.0);
            assert!(e.residual(&h) <= tol, "seed {seed}: residual {}", e.residual(&h));
            assert!(e.orthogonality_error() < 1e-10);
            assert!(e.values.as_slice().windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn degenerate_clusters() {
        // identity and a repeated block: every vector is an eigenvector
        let h = HermitianMatrix::from_real(&DMatrix::identity(5, 5)).unwrap();
        let e = hermitian_eigh(&h);
        assert!(e.orthogonality_error() < 1e-12);
        // complete graph K4 (bidirected), eigenvalues 0, 4, 4, 4 scaled by A_s = 1
        let edges: Vec<_> = (0..4).flat_map(|u| (0..4).filter(move |&v| v != u).map(move |v| (u, v))).collect();
        let l = crate::magnetic::laplacian::magnetic_laplacian(&Digraph::new(4, &edges), 0.2).unwrap();
        let e = hermitian_eigh(&l);
        assert!(e.residual(&l) < 1e-10);
        assert!(e.orthogonality_error() < 1e-10);
    }

    #[test]
    fn agrees_with_library_solver() {
        for seed in 0..5 {
            let h = random_hermitian(6, 100 + seed);
            let ours = hermitian_eigenvalues(&h);
            let reference = nalgebra::SymmetricEigen::new(real_embedding(h.matrix())).eigenvalues;
            let mut r: Vec<f64> = reference.iter().copied().collect();
            r.sort_by(f64::total_cmp);
            for k in 0..6 {
                assert!((ours[k] - r[2 * k]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rejects_non_hermitian_input() {
        let mut m = DMatrix::<C64>::zeros(2, 2);
        m[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(hermitian_eigh_checked(&m), Err(Error::NotHermitian { .. })));
    }
}
