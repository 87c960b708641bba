//! Topological uncertainty, personalized charges and the stochastic phase factor.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::{Digraph, NodeId};
use crate::seed;

/// Upper end of the admissible charge interval.
pub const MAX_CHARGE: f64 = 0.25;

/// Unordered node pair, smaller id first.
pub type PairKey = (NodeId, NodeId);

pub fn pair_key(u: NodeId, v: NodeId) -> PairKey {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        p * p.ln()
    } else {
        0.0
    }
}

/// Per-node in/out degree balance, in bits.
///
/// `U_v = -[(d_in/m) ln(d_in/m) + (d_out/m) ln(d_out/m)] / ln 2` with
/// `0 ln 0 = 0`. With `smoothing`, degrees are replaced by `d + 1`.
pub fn node_uncertainty(g: &Digraph, smoothing: bool) -> Result<Vec<f64>> {
    let m = g.edge_count();
    if m == 0 {
        return Err(Error::NoEdges);
    }
    let m = m as f64;
    let bump = if smoothing { 1.0 } else { 0.0 };
    let (d_in, d_out) = g.degrees();
    Ok(d_in
        .iter()
        .zip(&d_out)
        .map(|(&i, &o)| {
            let pi = (i as f64 + bump) / m;
            let po = (o as f64 + bump) / m;
            -(plogp(pi) + plogp(po)) / std::f64::consts::LN_2
        })
        .collect())
}

/// Personalized charges `q*_uv = q0 * tanh((U_u + U_v) / mean(U))` on every edge.
#[derive(Clone, Debug, PartialEq)]
pub struct ChargeField {
    pub q0: f64,
    pub uncertainty: Vec<f64>,
    pub mean_uncertainty: f64,
    charges: BTreeMap<PairKey, f64>,
}

impl ChargeField {
    /// Charge of the edge between `u` and `v` (either orientation).
    pub fn charge(&self, u: NodeId, v: NodeId) -> Option<f64> {
        self.charges.get(&pair_key(u, v)).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (PairKey, f64)> + '_ {
        self.charges.iter().map(|(&k, &q)| (k, q))
    }

    pub fn len(&self) -> usize {
        self.charges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.charges.is_empty()
    }

    /// Same charge `q` on every edge; the uncertainty fields are left empty.
    pub fn uniform(g: &Digraph, q: f64) -> Self {
        let charges = g.edges().iter().map(|&(u, v)| (pair_key(u, v), q)).collect();
        Self { q0: q, uncertainty: Vec::new(), mean_uncertainty: f64::NAN, charges }
    }
}

/// Topological modulation coefficient `tanh((U_u + U_v) / mean(U))`.
pub fn topo_coefficient(pair_uncertainty: f64, mean_uncertainty: f64) -> f64 {
    (pair_uncertainty / mean_uncertainty).tanh()
}

pub fn personalized_charge(g: &Digraph, q0: f64, smoothing: bool) -> Result<ChargeField> {
    if !(q0 > 0.0 && q0 <= MAX_CHARGE) {
        return Err(Error::InvalidArgument(format!("base charge {q0} outside (0, 0.25]")));
    }
    let uncertainty = node_uncertainty(g, smoothing)?;
    let mean = uncertainty.iter().sum::<f64>() / uncertainty.len() as f64;
    if mean <= 0.0 {
        return Err(Error::DegenerateUncertainty);
    }
    let charges = g
        .edges()
        .iter()
        .map(|&(u, v)| (pair_key(u, v), q0 * topo_coefficient(uncertainty[u] + uncertainty[v], mean)))
        .collect();
    Ok(ChargeField { q0, uncertainty, mean_uncertainty: mean, charges })
}

/// Parameters of one stochastic complex-domain view.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerturbationSpec {
    /// Probability of keeping an edge's orientation.
    pub r: f64,
    /// Half-width of the uniform charge jitter.
    pub delta_q_max: f64,
    pub seed: u64,
}

impl PerturbationSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.r) {
            return Err(Error::InvalidArgument(format!("r = {} outside [0, 1]", self.r)));
        }
        if !(self.delta_q_max >= 0.0 && self.delta_q_max.is_finite()) {
            return Err(Error::InvalidArgument(format!("delta_q_max = {} must be >= 0", self.delta_q_max)));
        }
        Ok(())
    }
}

/// Per-edge phase factor `Phi`, shared by both orientations of a pair.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseField(BTreeMap<PairKey, f64>);

impl PhaseField {
    pub fn from_map(map: BTreeMap<PairKey, f64>) -> Self {
        Self(map)
    }

    pub fn uniform(g: &Digraph, phi: f64) -> Self {
        Self(g.edges().iter().map(|&(u, v)| (pair_key(u, v), phi)).collect())
    }

    /// Phase factor of the pair `{u, v}`; zero when absent.
    pub fn get(&self, u: NodeId, v: NodeId) -> f64 {
        self.0.get(&pair_key(u, v)).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (PairKey, f64)> + '_ {
        self.0.iter().map(|(&k, &q)| (k, q))
    }

    /// `Phi -> 1 - Phi` on every pair.
    pub fn complement(&self) -> Self {
        Self(self.0.iter().map(|(&k, &p)| (k, 1.0 - p)).collect())
    }
}

/// Uniform draw in `[0, 1)` keyed by `(seed, stream, pair)`.
fn pair_uniform(seed: u64, stream: &str, key: PairKey) -> f64 {
    let idx = ((key.0 as u64) << 32) ^ key.1 as u64;
    (seed::derive_indexed(seed, stream, idx) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Whether the pair keeps its orientation under `spec`.
fn keeps_orientation(spec: &PerturbationSpec, key: PairKey) -> bool {
    pair_uniform(spec.seed, "phase/keep", key) < spec.r
}

/// `Phi(u,v) = q*_uv` with probability `r`, else `1 - q*_uv`.
pub fn sample_phase_factor(cf: &ChargeField, spec: &PerturbationSpec) -> PhaseField {
    PhaseField(
        cf.iter()
            .map(|(k, q)| (k, if keeps_orientation(spec, k) { q } else { 1.0 - q }))
            .collect(),
    )
}

/// Phase factor of a perturbed view: each charge is jittered by
/// `dq ~ U[-delta_q_max, delta_q_max]`, clipped into `[0, 0.25]`, then kept or
/// flipped to `1 - q` as in [`sample_phase_factor`].
pub fn sample_perturbed_phase(cf: &ChargeField, spec: &PerturbationSpec) -> PhaseField {
    PhaseField(
        cf.iter()
            .map(|(k, q)| {
                let dq = if spec.delta_q_max > 0.0 {
                    (2.0 * pair_uniform(spec.seed, "phase/jitter", k) - 1.0) * spec.delta_q_max
                } else {
                    0.0
                };
                let q = (q + dq).clamp(0.0, MAX_CHARGE);
                (k, if keeps_orientation(spec, k) { q } else { 1.0 - q })
            })
            .collect(),
    )
}

/// Fraction of pairs that kept their orientation (diagnostic).
pub fn kept_fraction(cf: &ChargeField, spec: &PerturbationSpec) -> f64 {
    if cf.is_empty() {
        return 1.0;
    }
    cf.iter().filter(|&(k, _)| keeps_orientation(spec, k)).count() as f64 / cf.len() as f64
}
