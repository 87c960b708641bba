//! Link existence and direction classification on frozen embeddings.

use nalgebra::DMatrix;

use super::probe::{LogisticRegression, ProbeResult};
use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::split::EdgeSplit;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinkTask {
    /// Edge versus sampled non-edge.
    Existence,
    /// `(u, v)` as class 1 and `(v, u)` as class 0 for every true edge.
    Direction,
}

/// Candidate L2 penalties for the link classifier, picked on validation pairs.
pub const DEFAULT_LINK_L2_GRID: [f64; 5] = [1e-4, 1e-3, 1e-2, 1e-1, 1.0];

#[derive(Clone, Debug, PartialEq)]
pub struct LinkTaskSpec {
    pub task: LinkTask,
    pub split: EdgeSplit,
    pub iterations: usize,
    /// Penalties to try; the one with the best validation accuracy is kept
    /// (ties go to the larger penalty). Without validation pairs the first is used.
    pub l2_grid: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinkResult {
    pub l2: f64,
    pub train_accuracy: f64,
    pub valid_accuracy: Option<f64>,
    pub test: ProbeResult,
}

impl LinkResult {
    pub fn accuracy(&self) -> f64 {
        self.test.accuracy
    }
}

/// `[E_u | E_v]` per pair.
pub fn pair_features(embeddings: &DMatrix<f64>, pairs: &[(NodeId, NodeId)]) -> DMatrix<f64> {
    let d = embeddings.ncols();
    let mut out = DMatrix::zeros(pairs.len(), 2 * d);
    for (i, &(u, v)) in pairs.iter().enumerate() {
        out.view_mut((i, 0), (1, d)).copy_from(&embeddings.row(u));
        out.view_mut((i, d), (1, d)).copy_from(&embeddings.row(v));
    }
    out
}

/// Labeled pairs for one task from positives and negatives of one split part.
pub fn labeled_pairs(
    task: LinkTask,
    positives: &[(NodeId, NodeId)],
    negatives: &[(NodeId, NodeId)],
) -> (Vec<(NodeId, NodeId)>, Vec<usize>) {
    let mut pairs = Vec::new();
    let mut labels = Vec::new();
    match task {
        LinkTask::Existence => {
            for &e in positives {
                pairs.push(e);
                labels.push(1);
            }
            for &e in negatives {
                pairs.push(e);
                labels.push(0);
            }
        }
        LinkTask::Direction => {
            for &(u, v) in positives {
                pairs.push((u, v));
                labels.push(1);
                pairs.push((v, u));
                labels.push(0);
            }
        }
    }
    (pairs, labels)
}

fn accuracy(predicted: &[usize], truth: &[usize]) -> f64 {
    predicted.iter().zip(truth).filter(|(a, b)| a == b).count() as f64 / truth.len() as f64
}

/// Trains on the split's training part, selects the penalty on its validation
/// part, and scores its test part.
pub fn link_eval(embeddings: &DMatrix<f64>, spec: &LinkTaskSpec) -> Result<LinkResult> {
    let s = &spec.split;
    let (train_pairs, train_labels) = labeled_pairs(spec.task, &s.train, &s.train_neg);
    let (valid_pairs, valid_labels) = labeled_pairs(spec.task, &s.valid, &s.valid_neg);
    let (test_pairs, test_labels) = labeled_pairs(spec.task, &s.test, &s.test_neg);
    if train_pairs.is_empty() || test_pairs.is_empty() {
        return Err(Error::InvalidArgument("empty link split".into()));
    }
    if spec.l2_grid.is_empty() {
        return Err(Error::InvalidArgument("empty L2 grid".into()));
    }
    let all = train_pairs.iter().chain(&valid_pairs).chain(&test_pairs);
    if let Some(&(u, v)) = all.clone().find(|(u, v)| *u.max(v) >= embeddings.nrows()) {
        return Err(Error::Shape(format!("pair ({u}, {v}) outside {} embeddings", embeddings.nrows())));
    }
    let xtr = pair_features(embeddings, &train_pairs);
    let xva = pair_features(embeddings, &valid_pairs);
    let mut best: Option<(f64, Option<f64>, LogisticRegression)> = None;
    for &l2 in &spec.l2_grid {
        let clf = LogisticRegression::fit(&xtr, &train_labels, 2, spec.iterations, l2)?;
        if valid_pairs.is_empty() {
            best = Some((l2, None, clf));
            break;
        }
        let va = accuracy(&clf.predict(&xva), &valid_labels);
        if best.as_ref().is_none_or(|b| va >= b.1.unwrap_or(f64::NEG_INFINITY)) {
            best = Some((l2, Some(va), clf));
        }
    }
    let (l2, valid_accuracy, clf) = best.expect("grid is non-empty");
    let train_accuracy = accuracy(&clf.predict(&xtr), &train_labels);
    let test_pred = clf.predict(&pair_features(embeddings, &test_pairs));
    Ok(LinkResult {
        l2,
        train_accuracy,
        valid_accuracy,
        test: ProbeResult::from_predictions(&test_labels, &test_pred, 2, 0, train_labels.len()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Digraph;
    use crate::sbm::gaussian_features;
    use crate::split::{split_edges, DEFAULT_RATIOS};

    fn ring() -> Digraph {
        let n = 40;
        let mut edges = Vec::new();
        for u in 0..n {
            edges.push((u, (u + 1) % n));
            edges.push((u, (u + 3) % n));
        }
        Digraph::new(n, &edges)
    }

    #[test]
    fn adjacency_rows_fit_existence() {
        // sources 0..6 point at every target 6..12
        let edges: Vec<_> = (0..6).flat_map(|u| (6..12).map(move |v| (u, v))).collect();
        let g = Digraph::new(12, &edges);
        let split = split_edges(&g, DEFAULT_RATIOS, 1).unwrap();
        let spec = LinkTaskSpec { task: LinkTask::Existence, split, iterations: 2000, l2_grid: vec![0.0] };
        let r = link_eval(&g.adjacency(), &spec).unwrap();
        assert_eq!(r.train_accuracy, 1.0);
        assert_eq!(r.accuracy(), 1.0);
    }

    #[test]
    fn random_embeddings_are_near_chance_on_direction() {
        let g = ring();
        let split = split_edges(&g, [0.5, 0.25, 0.25], 3).unwrap();
        let e = gaussian_features(40, 8, 5).0;
        let r = link_eval(&e, &LinkTaskSpec { task: LinkTask::Direction, split, iterations: 500, l2_grid: DEFAULT_LINK_L2_GRID.to_vec() }).unwrap();
        let n = r.test.test_size as f64;
        assert!((r.accuracy() - 0.5).abs() <= 3.0 * (0.25 / n).sqrt() + 1e-12, "{}", r.accuracy());
    }

    #[test]
    fn direction_pairs_come_in_both_orders() {
        let (pairs, labels) = labeled_pairs(LinkTask::Direction, &[(0, 1), (2, 3)], &[(5, 6)]);
        assert_eq!(pairs, vec![(0, 1), (1, 0), (2, 3), (3, 2)]);
        assert_eq!(labels, vec![1, 0, 1, 0]);
    }

    #[test]
    fn empty_split_is_an_error() {
        let split = EdgeSplit {
            train: vec![(0, 1)],
            valid: vec![],
            test: vec![],
            train_neg: vec![(1, 0)],
            valid_neg: vec![],
            test_neg: vec![],
        };
        let e = DMatrix::identity(2, 2);
        assert!(link_eval(&e, &LinkTaskSpec { task: LinkTask::Existence, split, iterations: 5, l2_grid: vec![0.0] }).is_err());
    }
}
