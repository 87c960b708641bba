//! Two-block directed stochastic block model used as synthetic data.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::graph::{Digraph, FeatureMatrix, NodeId};
use crate::seed;

/// Samples a two-block directed SBM.
///
/// Nodes `0..n/2` form block 0 and the rest block 1. Inside a block every pair
/// `u < v` independently gets `u -> v` with probability `p_fwd` and `v -> u`
/// with probability `p_back`; every cross-block ordered pair gets an edge with
/// probability `p_cross`. Returns the graph and the block labels.
pub fn generate_directed_sbm(
    n: usize,
    p_fwd: f64,
    p_back: f64,
    p_cross: f64,
    seed: u64,
) -> (Digraph, Vec<usize>) {
    assert!(n.is_multiple_of(2), "node count must be even");
    for p in [p_fwd, p_back, p_cross] {
        assert!((0.0..=1.0).contains(&p), "probability {p} outside [0, 1]");
    }
    let half = n / 2;
    let labels: Vec<usize> = (0..n).map(|v| v / half.max(1)).collect();
    let mut rng = seed::stream_rng(seed, "sbm/edges");
    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if labels[u] == labels[v] {
                if rng.random::<f64>() < p_fwd {
                    edges.push((u, v));
                }
                if rng.random::<f64>() < p_back {
                    edges.push((v, u));
                }
            } else {
                if rng.random::<f64>() < p_cross {
                    edges.push((u, v));
                }
                if rng.random::<f64>() < p_cross {
                    edges.push((v, u));
                }
            }
        }
    }
    (Digraph::new(n, &edges), labels)
}

/// Label-free node features: i.i.d. standard normal entries.
pub fn gaussian_features(n: usize, d: usize, seed: u64) -> FeatureMatrix {
    let mut rng = seed::stream_rng(seed, "sbm/features");
    FeatureMatrix(DMatrix::from_fn(n, d, |_, _| rng.sample(StandardNormal)))
}

/// One-hot node identities, `X = I_n`.
pub fn identity_features(n: usize) -> FeatureMatrix {
    FeatureMatrix(DMatrix::identity(n, n))
}
