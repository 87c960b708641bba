//! Downstream evaluation of frozen embeddings.

pub mod link;
pub mod pipeline;
pub mod probe;

pub use link::{labeled_pairs, link_eval, pair_features, LinkResult, LinkTask, LinkTaskSpec, DEFAULT_LINK_L2_GRID};
pub use probe::{
    linear_probe, stratified_split, LogisticRegression, ProbeResult, DEFAULT_PROBE_ITERATIONS, DEFAULT_PROBE_L2,
    DEFAULT_TRAIN_FRACTION,
};
pub use pipeline::{evaluate_link, link_prediction, link_split, node_classification, probe_embeddings, train_and_embed};
