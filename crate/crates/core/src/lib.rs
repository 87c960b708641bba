//! Dual-view contrastive learning on directed graphs.
//!
//! One view family lives in the complex domain: magnetic Laplacians whose
//! per-edge charges adapt to each node's in/out degree balance and are
//! stochastically flipped and jittered. The other lives in the real domain:
//! direction-aware second-order random walks encoded by a GRU. Both are fused
//! by a projection head and trained with an InfoNCE objective.
//!
//! The [`magnetic::entropy`] module also carries numerical checks of how the
//! spectral entropy of a magnetic Laplacian responds to the charge.

pub mod error;
pub mod eval;
pub mod graph;
pub mod magnetic;
pub mod neural;
pub mod sbm;
pub mod seed;
pub mod split;
pub mod train;
pub mod walk;

pub use error::{Error, Result};
pub use graph::{Digraph, FeatureMatrix, NodeId};
