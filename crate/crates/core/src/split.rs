//! Edge splits for link-level evaluation.

use std::collections::HashSet;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Digraph, NodeId};
use crate::seed;

pub const DEFAULT_RATIOS: [f64; 3] = [0.80, 0.15, 0.05];

/// Disjoint train/valid/test positives with one sampled non-edge per positive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeSplit {
    pub train: Vec<(NodeId, NodeId)>,
    pub valid: Vec<(NodeId, NodeId)>,
    pub test: Vec<(NodeId, NodeId)>,
    pub train_neg: Vec<(NodeId, NodeId)>,
    pub valid_neg: Vec<(NodeId, NodeId)>,
    pub test_neg: Vec<(NodeId, NodeId)>,
}

/// Split sizes by largest remainder. Ties go to the split with the smaller
/// ratio, every split gets at least one item, and train absorbs the slack.
pub fn split_sizes(m: usize, ratios: [f64; 3]) -> Result<[usize; 3]> {
    let total: f64 = ratios.iter().sum();
    if ratios.iter().any(|r| !(r.is_finite() && *r > 0.0)) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("split ratios {ratios:?} must be positive and sum to 1")));
    }
    if m < 3 {
        return Err(Error::TooSmall(format!("{m} edges cannot fill three splits")));
    }
    let raw: Vec<f64> = ratios.iter().map(|r| r * m as f64).collect();
    let mut sizes = [0usize; 3];
    for (s, r) in sizes.iter_mut().zip(&raw) {
        *s = r.floor() as usize;
    }
    let mut left = m - sizes.iter().sum::<usize>();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| {
        let (fa, fb) = (raw[a] - raw[a].floor(), raw[b] - raw[b].floor());
        fb.partial_cmp(&fa)
            .unwrap()
            .then(ratios[a].partial_cmp(&ratios[b]).unwrap())
    });
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        sizes[i] += 1;
        left -= 1;
    }
    for size in &mut sizes[1..] {
        *size = (*size).max(1);
    }
    let rest = sizes[1] + sizes[2];
    if rest >= m {
        return Err(Error::TooSmall(format!("{m} edges cannot fill three splits")));
    }
    sizes[0] = m - rest;
    Ok(sizes)
}

/// Shuffles the edges under `seed` and cuts them into train/valid/test,
/// then samples distinct negatives among ordered pairs that are not adjacent
/// in either direction.
pub fn split_edges(g: &Digraph, ratios: [f64; 3], seed: u64) -> Result<EdgeSplit> {
    let m = g.edge_count();
    let sizes = split_sizes(m, ratios)?;
    let mut edges = g.edges().to_vec();
    edges.shuffle(&mut seed::stream_rng(seed, "split/positives"));

    let negatives = sample_non_edges(g, m, seed)?;
    let cut = |v: &[(NodeId, NodeId)], a: usize, b: usize| {
        let mut part = v[a..b].to_vec();
        part.sort_unstable();
        part
    };
    let (a, b) = (sizes[0], sizes[0] + sizes[1]);
    Ok(EdgeSplit {
        train: cut(&edges, 0, a),
        valid: cut(&edges, a, b),
        test: cut(&edges, b, m),
        train_neg: cut(&negatives, 0, a),
        valid_neg: cut(&negatives, a, b),
        test_neg: cut(&negatives, b, m),
    })
}

fn sample_non_edges(g: &Digraph, count: usize, seed: u64) -> Result<Vec<(NodeId, NodeId)>> {
    let n = g.node_count();
    let mut rng = seed::stream_rng(seed, "split/negatives");
    let adjacent_pairs: HashSet<(NodeId, NodeId)> =
        g.edges().iter().flat_map(|&(u, v)| [(u, v), (v, u)]).collect();
    let available = n * (n - 1) - adjacent_pairs.len();
    if available < count {
        return Err(Error::TooSmall(format!(
            "only {available} non-adjacent pairs for {count} negatives"
        )));
    }
    // Dense graphs: enumerate and shuffle. Sparse graphs: rejection sampling.
    if available < 4 * count || n <= 512 {
        let mut all: Vec<_> = (0..n)
            .flat_map(|u| (0..n).map(move |v| (u, v)))
            .filter(|&(u, v)| u != v && !adjacent_pairs.contains(&(u, v)))
            .collect();
        let (picked, _) = all.partial_shuffle(&mut rng, count);
        return Ok(picked.to_vec());
    }
    let mut seen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u != v && !adjacent_pairs.contains(&(u, v)) && seen.insert((u, v)) {
            out.push((u, v));
        }
    }
    Ok(out)
}

const FILES: [&str; 6] = ["train.tsv", "valid.tsv", "test.tsv", "train_neg.tsv", "valid_neg.tsv", "test_neg.tsv"];

impl EdgeSplit {
    fn parts(&self) -> [&Vec<(NodeId, NodeId)>; 6] {
        [&self.train, &self.valid, &self.test, &self.train_neg, &self.valid_neg, &self.test_neg]
    }

    /// Writes six edge-list files into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        for (name, part) in FILES.iter().zip(self.parts()) {
            let mut w = BufWriter::new(fs::File::create(dir.join(name))?);
            for &(u, v) in part {
                writeln!(w, "{u}\t{v}")?;
            }
            w.flush()?;
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let mut parts: Vec<Vec<(NodeId, NodeId)>> = Vec::new();
        for name in FILES {
            let r = BufReader::new(fs::File::open(dir.join(name))?);
            let mut part = Vec::new();
            for (i, line) in r.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let bad = || Error::Parse { line: i + 1, msg: format!("{name}: bad pair {line:?}") };
                let (a, b) = line.trim().split_once('\t').ok_or_else(bad)?;
                part.push((a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?));
            }
            parts.push(part);
        }
        let mut it = parts.into_iter();
        let mut next = || it.next().unwrap();
        Ok(Self {
            train: next(),
            valid: next(),
            test: next(),
            train_neg: next(),
            valid_neg: next(),
            test_neg: next(),
        })
    }
}
