//! Magnetic Von Neumann entropy and numerical checks of its response to the
//! charge parameter.

use std::fmt;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::eigh::{hermitian_eigh, hermitian_eigenvalues};
use super::hermitian::{HermitianMatrix, C64};
use super::laplacian::magnetic_laplacian;
use crate::error::{Error, Result};
use crate::graph::Digraph;

pub const DEFAULT_BETA: f64 = 1.0;
/// Agreement required between the entropy formulas.
pub const FORMULA_TOL: f64 = 1e-9;
/// Smallest eigengap accepted by the monotonic-response check.
pub const MIN_EIGENGAP: f64 = 1e-6;

/// Gibbs spectrum of `L` at inverse temperature `beta`.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    pub beta: f64,
    pub eigenvalues: Vec<f64>,
    pub weights: Vec<f64>,
    pub log_partition: f64,
    /// `-sum p ln p`.
    pub entropy: f64,
    /// `beta E_p[lambda] + ln Z`.
    pub entropy_energy_form: f64,
    /// `-Tr(rho ln rho)` from the reconstructed density matrix.
    pub entropy_trace_form: f64,
}

impl SpectralReport {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn partition(&self) -> f64 {
        self.log_partition.exp()
    }

    /// `E_p[lambda]`.
    pub fn mean_eigenvalue(&self) -> f64 {
        self.weights.iter().zip(&self.eigenvalues).map(|(p, l)| p * l).sum()
    }

    /// Standard deviation of the eigenvalues under the Gibbs weights.
    pub fn eigenvalue_std(&self) -> f64 {
        let mean = self.mean_eigenvalue();
        let var: f64 = self
            .weights
            .iter()
            .zip(&self.eigenvalues)
            .map(|(p, l)| p * (l - mean) * (l - mean))
            .sum();
        var.max(0.0).sqrt()
    }

    /// Largest disagreement among the three entropy formulas.
    pub fn formula_gap(&self) -> f64 {
        let a = (self.entropy - self.entropy_energy_form).abs();
        let b = (self.entropy - self.entropy_trace_form).abs();
        a.max(b)
    }

    /// `k,lambda,p` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "k,lambda,p")?;
        for (k, (l, p)) in self.eigenvalues.iter().zip(&self.weights).enumerate() {
            writeln!(w, "{k},{l:?},{p:?}")?;
        }
        Ok(())
    }

    /// `{"H", "Z", "beta", "n"}`.
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "H": self.entropy,
            "Z": self.partition(),
            "beta": self.beta,
            "n": self.n(),
        })
    }
}

fn gibbs(values: &[f64], beta: f64) -> (Vec<f64>, Vec<f64>, f64) {
    let lmin = values.iter().copied().fold(f64::INFINITY, f64::min);
    let shifted: Vec<f64> = values.iter().map(|l| -beta * (l - lmin)).collect();
    let log_sum = shifted.iter().map(|x| x.exp()).sum::<f64>().ln();
    let log_z = -beta * lmin + log_sum;
    let log_p: Vec<f64> = shifted.iter().map(|x| x - log_sum).collect();
    let p = log_p.iter().map(|x| x.exp()).collect();
    (p, log_p, log_z)
}

/// Spectral entropy of `h` with weights `p_k = exp(-beta lambda_k) / Z`.
pub fn von_neumann_entropy(h: &HermitianMatrix, beta: f64) -> Result<SpectralReport> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidArgument(format!("beta = {beta} must be positive")));
    }
    if h.order() == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    let eig = hermitian_eigh(h);
    let values: Vec<f64> = eig.values.iter().copied().collect();
    let (p, log_p, log_z) = gibbs(&values, beta);

    let entropy = -p.iter().zip(&log_p).map(|(p, lp)| p * lp).sum::<f64>();
    let mean: f64 = p.iter().zip(&values).map(|(p, l)| p * l).sum();
    let entropy_energy_form = beta * mean + log_z;

    // rho = V diag(p) V^H, ln rho = V diag(ln p) V^H, H = -Re Tr(rho ln rho)
    let v = &eig.vectors;
    let diag = |d: &[f64]| DMatrix::from_diagonal(&DVector::from_iterator(d.len(), d.iter().map(|&x| C64::new(x, 0.0))));
    let rho = v * diag(&p) * v.adjoint();
    let log_rho = v * diag(&log_p) * v.adjoint();
    let trace: C64 = rho.component_mul(&log_rho.transpose()).iter().sum();
    let entropy_trace_form = -trace.re;

    Ok(SpectralReport {
        beta,
        eigenvalues: values,
        weights: p,
        log_partition: log_z,
        entropy,
        entropy_energy_form,
        entropy_trace_form,
    })
}

fn check_charge(q: f64) -> Result<()> {
    if !(0.0..0.5).contains(&q) {
        return Err(Error::InvalidArgument(format!("charge {q} outside [0, 0.5)")));
    }
    Ok(())
}

/// `H_VN(G, q)` under a uniform charge.
pub fn entropy_at(g: &Digraph, q: f64, beta: f64) -> Result<SpectralReport> {
    check_charge(q)?;
    von_neumann_entropy(&magnetic_laplacian(g, q)?, beta)
}

/// `H(q + dq) - H(q)` under a uniform charge (no flips, no jitter).
pub fn entropy_variation(g: &Digraph, q: f64, dq: f64, beta: f64) -> Result<f64> {
    check_charge(q)?;
    check_charge(q + dq)?;
    if dq == 0.0 {
        return Ok(0.0);
    }
    Ok(entropy_at(g, q + dq, beta)?.entropy - entropy_at(g, q, beta)?.entropy)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Flag,
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Flag => "FLAG",
            Verdict::Fail => "FAIL",
        })
    }
}

/// Finite-difference check of `dH/dq = -beta^2 Cov_p(lambda, dlambda/dq)`.
#[derive(Clone, Debug, Serialize)]
pub struct MonotonicReport {
    pub q: f64,
    pub beta: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
    pub min_gap: f64,
    pub verdict: Verdict,
}

impl fmt::Display for MonotonicReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} monotonic-response q={} beta={} lhs={:.6e} rhs={:.6e} rel_err={:.3e} min_gap={:.3e}",
            self.verdict, self.q, self.beta, self.lhs, self.rhs, self.rel_err, self.min_gap
        )
    }
}

fn spectrum(g: &Digraph, q: f64) -> Result<DVector<f64>> {
    Ok(hermitian_eigenvalues(&magnetic_laplacian(g, q)?))
}

/// Compares the central difference of `H` in `q` with the covariance form.
///
/// `dlambda/dq` is estimated by central differences with eigenvalues paired in
/// sorted order, which needs a simple spectrum at `q`; a gap below
/// [`MIN_EIGENGAP`] yields a `Flag` verdict instead of a comparison.
pub fn verify_monotonic_response(g: &Digraph, q: f64, beta: f64, eps: f64) -> Result<MonotonicReport> {
    check_charge(q)?;
    if !(eps > 0.0 && eps <= 1e-4) {
        return Err(Error::InvalidArgument(format!("step {eps} must lie in (0, 1e-4]")));
    }
    let center = spectrum(g, q)?;
    let min_gap = center
        .as_slice()
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    if min_gap < MIN_EIGENGAP {
        return Ok(MonotonicReport {
            q,
            beta,
            lhs: f64::NAN,
            rhs: f64::NAN,
            rel_err: f64::NAN,
            min_gap,
            verdict: Verdict::Flag,
        });
    }
    let plus = spectrum(g, q + eps)?;
    let minus = spectrum(g, q - eps)?;
    let entropy = |vals: &DVector<f64>| {
        let (p, log_p, _) = gibbs(vals.as_slice(), beta);
        -p.iter().zip(&log_p).map(|(p, lp)| p * lp).sum::<f64>()
    };
    let lhs = (entropy(&plus) - entropy(&minus)) / (2.0 * eps);

    let (p, _, _) = gibbs(center.as_slice(), beta);
    let dlam: Vec<f64> = plus.iter().zip(minus.iter()).map(|(a, b)| (a - b) / (2.0 * eps)).collect();
    let e_lam: f64 = p.iter().zip(center.iter()).map(|(p, l)| p * l).sum();
    let e_dlam: f64 = p.iter().zip(&dlam).map(|(p, d)| p * d).sum();
    let cov: f64 = p
        .iter()
        .zip(center.iter().zip(&dlam))
        .map(|(p, (l, d))| p * (l - e_lam) * (d - e_dlam))
        .sum();
    let rhs = -beta * beta * cov;
    let rel_err = (lhs - rhs).abs() / lhs.abs().max(1.0);
    let verdict = if rel_err <= 1e-3 { Verdict::Pass } else { Verdict::Fail };
    Ok(MonotonicReport { q, beta, lhs, rhs, rel_err, min_gap, verdict })
}

/// Check of `|dH| <= beta^2 / sqrt(n) * sup_xi sigma_lambda(xi) * |dL|_F`.
#[derive(Clone, Debug, Serialize)]
pub struct BoundedReport {
    pub q: f64,
    pub dq: f64,
    pub beta: f64,
    pub abs_delta_h: f64,
    pub bound: f64,
    pub slack: f64,
    pub verdict: Verdict,
}

impl fmt::Display for BoundedReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} bounded-variation q={} dq={} beta={} |dH|={:.6e} bound={:.6e} slack={:.6e}",
            self.verdict, self.q, self.dq, self.beta, self.abs_delta_h, self.bound, self.slack
        )
    }
}

/// The intermediate charge of the bound is unknown, so the supremum of
/// `sigma_lambda` over `grid` evenly spaced charges in `[q, q + dq]` is used.
pub fn verify_bounded_variation(g: &Digraph, q: f64, dq: f64, beta: f64, grid: usize) -> Result<BoundedReport> {
    check_charge(q)?;
    check_charge(q + dq)?;
    if grid == 0 {
        return Err(Error::InvalidArgument("grid must have at least one point".into()));
    }
    let l0 = magnetic_laplacian(g, q)?;
    let l1 = magnetic_laplacian(g, q + dq)?;
    let h0 = von_neumann_entropy(&l0, beta)?;
    let h1 = von_neumann_entropy(&l1, beta)?;
    let abs_delta_h = (h1.entropy - h0.entropy).abs();
    let mut sigma_sup: f64 = 0.0;
    for i in 0..grid {
        let xi = if grid == 1 { q } else { q + dq * i as f64 / (grid - 1) as f64 };
        let sigma = match i {
            0 => h0.eigenvalue_std(),
            _ if i == grid - 1 => h1.eigenvalue_std(),
            _ => entropy_at(g, xi, beta)?.eigenvalue_std(),
        };
        sigma_sup = sigma_sup.max(sigma);
    }
    let n = g.node_count() as f64;
    let bound = beta * beta / n.sqrt() * sigma_sup * l1.frobenius_distance(&l0);
    let slack = bound - abs_delta_h;
    let verdict = if abs_delta_h <= bound { Verdict::Pass } else { Verdict::Fail };
    Ok(BoundedReport { q, dq, beta, abs_delta_h, bound, slack, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle3() -> Digraph {
        Digraph::new(3, &[(0, 1), (1, 2), (2, 0)])
    }

    fn diag(values: &[f64]) -> HermitianMatrix {
        HermitianMatrix::from_real(&DMatrix::from_diagonal(&DVector::from_row_slice(values))).unwrap()
    }

    #[test]
    fn uniform_spectrum() {
        let r = von_neumann_entropy(&diag(&[0.0; 4]), 2.5).unwrap();
        for p in &r.weights {
            assert!((p - 0.25).abs() < 1e-15);
        }
        assert!((r.entropy - 4f64.ln()).abs() < 1e-12);
        assert!(r.formula_gap() < FORMULA_TOL);
    }

    #[test]
    fn two_level_gibbs() {
        // p = [1, e^-10] / (1 + e^-10); H = -sum p ln p (evaluated in numpy)
        let r = von_neumann_entropy(&diag(&[0.0, 10.0]), 1.0).unwrap();
        assert!((r.weights[0] - 0.9999546021312976).abs() < 1e-12);
        assert!((r.weights[1] - 4.5397868702434395e-05).abs() < 1e-15);
        assert!((r.entropy - 4.993775862411646e-04).abs() < 1e-12);
        assert!(r.formula_gap() < FORMULA_TOL);
    }

    #[test]
    fn high_temperature_limit() {
        let g = Digraph::new(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)]);
        let r = entropy_at(&g, 0.2, 1e-8).unwrap();
        assert!((r.entropy - 5f64.ln()).abs() < 1e-4);
    }

    #[test]
    fn rejects_bad_beta_and_charge() {
        assert!(von_neumann_entropy(&diag(&[1.0]), 0.0).is_err());
        assert!(entropy_at(&cycle3(), 0.5, 1.0).is_err());
        assert!(entropy_at(&cycle3(), 0.49, 1.0).is_ok());
    }

    #[test]
    fn variation_examples() {
        assert_eq!(entropy_variation(&cycle3(), 0.1, 0.0, 1.0).unwrap(), 0.0);
        let bi = Digraph::new(3, &[(0, 1), (1, 0), (1, 2), (2, 1)]);
        for q in [0.0, 0.1, 0.2] {
            assert_eq!(entropy_variation(&bi, q, 0.05, 1.0).unwrap(), 0.0);
        }
        // brute force eigendecomposition in numpy at q = 0.15 and q = 0.1
        let dh = entropy_variation(&cycle3(), 0.1, 0.05, 1.0).unwrap();
        assert!((dh - 0.03967845294419703).abs() < 1e-10, "{dh}");
    }

    #[test]
    fn monotonic_examples() {
        let bi = Digraph::new(3, &[(0, 1), (1, 0), (1, 2), (2, 1)]);
        let r = verify_monotonic_response(&bi, 0.1, 1.0, 1e-5).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        assert_eq!(r.verdict, Verdict::Pass);
        let r = verify_monotonic_response(&cycle3(), 0.1, 1.0, 1e-5).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{r}");
        assert!(verify_monotonic_response(&cycle3(), 0.1, 1.0, 1e-2).is_err());
    }

    #[test]
    fn monotonic_random_digraph() {
        use rand::Rng;
        let mut rng = crate::seed::rng(3);
        let edges: Vec<_> = (0..20)
            .flat_map(|u| (0..20).map(move |v| (u, v)))
            .filter(|&(u, v)| u != v)
            .filter(|_| rng.random::<f64>() < 0.15)
            .collect();
        let g = Digraph::new(20, &edges);
        let r = verify_monotonic_response(&g, 0.05, 1.0, 1e-5).unwrap();
        assert_ne!(r.verdict, Verdict::Fail, "{r}");
    }

    #[test]
    fn near_degenerate_is_flagged() {
        // undirected 4-cycle has a double eigenvalue
        let g = Digraph::new(4, &[(0, 1), (1, 0), (1, 2), (2, 1), (2, 3), (3, 2), (3, 0), (0, 3)]);
        let r = verify_monotonic_response(&g, 0.1, 1.0, 1e-5).unwrap();
        assert_eq!(r.verdict, Verdict::Flag);
    }

    #[test]
    fn bounded_examples() {
        let r = verify_bounded_variation(&cycle3(), 0.1, 0.0, 1.0, 16).unwrap();
        assert_eq!(r.abs_delta_h, 0.0);
        assert_eq!(r.verdict, Verdict::Pass);
        let r = verify_bounded_variation(&cycle3(), 0.05, 0.1, 1.0, 16).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{r}");
    }

    #[test]
    fn report_serialization() {
        let r = entropy_at(&cycle3(), 0.1, 1.0).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("k,lambda,p\n0,"));
        assert_eq!(text.lines().count(), 4);
        let j = r.summary_json();
        assert_eq!(j["n"], 3);
        assert!((j["Z"].as_f64().unwrap() - r.partition()).abs() < 1e-15);
    }
}
