//! Symmetrized operators, phase matrices and magnetic Laplacians.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};

use super::charge::{sample_perturbed_phase, ChargeField, PerturbationSpec, PhaseField};
use super::hermitian::{HermitianMatrix, C64};
use crate::error::{Error, Result};
use crate::graph::Digraph;

/// `A_s = (A + A^T) / 2` and the diagonal of `D_s` (row sums of `A_s`).
pub fn symmetrize(g: &Digraph) -> (DMatrix<f64>, DVector<f64>) {
    let n = g.node_count();
    let mut a_s = DMatrix::zeros(n, n);
    for &(u, v) in g.edges() {
        a_s[(u, v)] += 0.5;
        a_s[(v, u)] += 0.5;
    }
    let d_s = DVector::from_fn(n, |v, _| a_s.row(v).sum());
    (a_s, d_s)
}

/// `Theta(u,v) = 2 pi (A(u,v) - A(v,u)) Phi(u,v)`.
///
/// Only directed-only pairs get a nonzero phase, written as `x` and `-x`, so
/// antisymmetry holds bit-for-bit.
pub fn build_phase(g: &Digraph, phi: &PhaseField) -> DMatrix<f64> {
    let n = g.node_count();
    let mut theta = DMatrix::zeros(n, n);
    for &(u, v) in g.edges() {
        if !g.has_edge(v, u) {
            let t = TAU * phi.get(u, v);
            theta[(u, v)] = t;
            theta[(v, u)] = -t;
        }
    }
    theta
}

/// Entrywise `exp(i Theta)`.
pub fn phase_exponential(theta: &DMatrix<f64>) -> DMatrix<C64> {
    theta.map(|t| C64::new(t.cos(), t.sin()))
}

/// `L = D_s - A_s ⊙ exp(i Theta)`.
pub fn build_magnetic_laplacian(
    a_s: &DMatrix<f64>,
    d_s: &DVector<f64>,
    theta: &DMatrix<f64>,
) -> Result<HermitianMatrix> {
    let n = a_s.nrows();
    if a_s.shape() != (n, n) || theta.shape() != (n, n) || d_s.len() != n {
        return Err(Error::Shape(format!(
            "A_s {:?}, Theta {:?}, D_s {}",
            a_s.shape(),
            theta.shape(),
            d_s.len()
        )));
    }
    let mut l = DMatrix::from_fn(n, n, |u, v| {
        let w = a_s[(u, v)];
        if w == 0.0 {
            C64::new(0.0, 0.0)
        } else {
            let t = theta[(u, v)];
            C64::new(-w * t.cos(), -w * t.sin())
        }
    });
    for v in 0..n {
        l[(v, v)] += C64::new(d_s[v], 0.0);
    }
    HermitianMatrix::new(l)
}

/// Magnetic Laplacian of `g` under phase factor `phi`.
pub fn laplacian_with_phase(g: &Digraph, phi: &PhaseField) -> Result<HermitianMatrix> {
    let (a_s, d_s) = symmetrize(g);
    build_magnetic_laplacian(&a_s, &d_s, &build_phase(g, phi))
}

/// `L^(q)` with the same charge on every edge.
pub fn magnetic_laplacian(g: &Digraph, q: f64) -> Result<HermitianMatrix> {
    laplacian_with_phase(g, &PhaseField::uniform(g, q))
}

/// `L^(q*)`: personalized charges, no perturbation.
pub fn personalized_laplacian(g: &Digraph, cf: &ChargeField) -> Result<HermitianMatrix> {
    laplacian_with_phase(g, &PhaseField::from_map(cf.iter().collect()))
}

/// `L^(q*)_{r, dq}`: stochastic orientation flips and clipped charge jitter.
pub fn perturbed_laplacian(g: &Digraph, cf: &ChargeField, spec: &PerturbationSpec) -> Result<HermitianMatrix> {
    spec.validate()?;
    laplacian_with_phase(g, &sample_perturbed_phase(cf, spec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::magnetic::charge::personalized_charge;
    use std::f64::consts::FRAC_PI_2;

    fn cycle3() -> Digraph {
        Digraph::new(3, &[(0, 1), (1, 2), (2, 0)])
    }

    #[test]
    fn symmetrize_examples() {
        let (a, d) = symmetrize(&cycle3());
        for (u, v) in [(0, 1), (1, 0), (1, 2), (2, 1), (2, 0), (0, 2)] {
            assert_eq!(a[(u, v)], 0.5);
        }
        assert_eq!(d.as_slice(), &[1.0, 1.0, 1.0]);
        let (a, _) = symmetrize(&Digraph::new(2, &[(0, 1), (1, 0)]));
        assert_eq!(a[(0, 1)], 1.0);
        let (a, d) = symmetrize(&Digraph::new(3, &[]));
        assert!(a.iter().all(|&x| x == 0.0) && d.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn phase_examples() {
        let g = Digraph::new(2, &[(0, 1)]);
        let th = build_phase(&g, &PhaseField::uniform(&g, 0.25));
        assert!((th[(0, 1)] - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(th[(1, 0)], -th[(0, 1)]);
        let bi = Digraph::new(2, &[(0, 1), (1, 0)]);
        assert_eq!(build_phase(&bi, &PhaseField::uniform(&bi, 0.25))[(0, 1)], 0.0);
    }

    #[test]
    fn complement_phase_is_conjugate() {
        // exp(i 2 pi (1 - q)) = exp(-i 2 pi q): flipping Phi conjugates every
        // directed-only entry, which is the Laplacian of the reversed graph.
        let g = Digraph::new(4, &[(0, 1), (1, 2), (2, 3), (3, 1), (2, 1)]);
        let phi = PhaseField::uniform(&g, 0.13);
        let a = phase_exponential(&build_phase(&g, &phi));
        let b = phase_exponential(&build_phase(&g, &phi.complement()));
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x.conj() - y).norm() < 1e-12);
        }
    }

    #[test]
    fn three_cycle_quarter_charge() {
        let l = magnetic_laplacian(&cycle3(), 0.25).unwrap();
        let m = l.matrix();
        assert!((m[(0, 1)] - C64::new(0.0, -0.5)).norm() < 1e-15);
        assert!((m[(1, 0)] - C64::new(0.0, 0.5)).norm() < 1e-15);
        for v in 0..3 {
            assert_eq!(m[(v, v)], C64::new(1.0, 0.0));
        }
    }

    #[test]
    fn zero_charge_is_undirected_laplacian() {
        let g = Digraph::new(4, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 2)]);
        let l = magnetic_laplacian(&g, 0.0).unwrap();
        let (a, d) = symmetrize(&g);
        let expected = DMatrix::from_diagonal(&d) - a;
        for u in 0..4 {
            for v in 0..4 {
                assert!((l.matrix()[(u, v)] - C64::new(expected[(u, v)], 0.0)).norm() < 1e-12);
            }
        }
        let empty = magnetic_laplacian(&Digraph::new(3, &[]), 0.1).unwrap();
        assert!(empty.matrix().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn shape_mismatch() {
        let (a, d) = symmetrize(&cycle3());
        let th = DMatrix::zeros(2, 2);
        assert!(matches!(build_magnetic_laplacian(&a, &d, &th), Err(Error::Shape(_))));
    }

    #[test]
    fn no_op_perturbation_matches_base() {
        let g = Digraph::new(5, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2)]);
        let cf = personalized_charge(&g, 0.25, false).unwrap();
        let base = personalized_laplacian(&g, &cf).unwrap();
        let spec = PerturbationSpec { r: 1.0, delta_q_max: 0.0, seed: 9 };
        assert_eq!(perturbed_laplacian(&g, &cf, &spec).unwrap(), base);
    }

    #[test]
    fn different_seeds_give_different_views() {
        let g = cycle3();
        let cf = personalized_charge(&g, 0.25, false).unwrap();
        let views: Vec<_> = (0..8)
            .map(|s| perturbed_laplacian(&g, &cf, &PerturbationSpec { r: 0.5, delta_q_max: 0.05, seed: s }).unwrap())
            .collect();
        assert!(views.windows(2).any(|w| w[0].frobenius_distance(&w[1]) > 0.0));
        let a = perturbed_laplacian(&g, &cf, &PerturbationSpec { r: 0.5, delta_q_max: 0.05, seed: 1 }).unwrap();
        let b = perturbed_laplacian(&g, &cf, &PerturbationSpec { r: 0.5, delta_q_max: 0.05, seed: 2 }).unwrap();
        assert!(a.frobenius_distance(&b) > 0.0);
    }
}
