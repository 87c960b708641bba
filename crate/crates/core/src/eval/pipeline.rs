//! Train-then-evaluate runs used by the command line and end-to-end checks.

use nalgebra::DMatrix;

use super::link::{link_eval, LinkResult, LinkTask, LinkTaskSpec, DEFAULT_LINK_L2_GRID};
use super::probe::{linear_probe, stratified_split, ProbeResult, DEFAULT_TRAIN_FRACTION};
use crate::error::Result;
use crate::graph::Digraph;
use crate::seed;
use crate::split::{split_edges, EdgeSplit, DEFAULT_RATIOS};
use crate::train::{embed, train, TrainConfig, ViewContext};

/// Frozen embeddings of a freshly trained encoder.
pub fn train_and_embed(graph: &Digraph, features: &DMatrix<f64>, cfg: &TrainConfig) -> Result<DMatrix<f64>> {
    let outcome = train(graph, features, cfg)?;
    embed(&outcome.model, &ViewContext::new(graph, features, cfg)?, cfg)
}

/// Linear probe on embeddings with a stratified split seeded by `cfg.seed`.
pub fn probe_embeddings(embeddings: &DMatrix<f64>, labels: &[usize], cfg: &TrainConfig) -> Result<ProbeResult> {
    let (train_mask, test_mask) = stratified_split(labels, DEFAULT_TRAIN_FRACTION, cfg.seed)?;
    linear_probe(embeddings, labels, &train_mask, &test_mask, cfg.seed, cfg.probe_iterations, cfg.probe_l2)
}

/// Trains on the whole graph and probes node labels.
pub fn node_classification(
    graph: &Digraph,
    features: &DMatrix<f64>,
    labels: &[usize],
    cfg: &TrainConfig,
) -> Result<ProbeResult> {
    probe_embeddings(&train_and_embed(graph, features, cfg)?, labels, cfg)
}

/// Edge split used for link tasks under `cfg.seed`.
pub fn link_split(graph: &Digraph, cfg: &TrainConfig) -> Result<EdgeSplit> {
    split_edges(graph, DEFAULT_RATIOS, seed::derive(cfg.seed, "link/split"))
}

/// Scores a link task on embeddings trained on the split's training edges.
pub fn evaluate_link(embeddings: &DMatrix<f64>, split: &EdgeSplit, task: LinkTask, cfg: &TrainConfig) -> Result<LinkResult> {
    let spec = LinkTaskSpec {
        task,
        split: split.clone(),
        iterations: cfg.probe_iterations,
        l2_grid: DEFAULT_LINK_L2_GRID.to_vec(),
    };
    link_eval(embeddings, &spec)
}

/// Splits edges, trains on the training edges only, and scores `task`.
pub fn link_prediction(graph: &Digraph, features: &DMatrix<f64>, task: LinkTask, cfg: &TrainConfig) -> Result<LinkResult> {
    let split = link_split(graph, cfg)?;
    let train_graph = graph.with_edges(&split.train)?;
    let embeddings = train_and_embed(&train_graph, features, cfg)?;
    evaluate_link(&embeddings, &split, task, cfg)
}
