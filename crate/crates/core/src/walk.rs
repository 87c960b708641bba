//! Second-order direction-aware random walks (BFS-like and DFS-like regimes).

use std::fmt;
use std::io::{BufRead, Write};

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Digraph, NodeId};
use crate::seed;

/// Walk bias parameters. `p_return` weights stepping back to the previous
/// node, `q_inout` weights moving two hops away from it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WalkParams {
    pub p_return: f64,
    pub q_inout: f64,
    /// Steps after the start node.
    pub length: usize,
    pub seed: u64,
}

impl WalkParams {
    pub fn bfs(length: usize, seed: u64) -> Self {
        Self { p_return: 0.25, q_inout: 4.0, length, seed }
    }

    pub fn dfs(length: usize, seed: u64) -> Self {
        Self { p_return: 4.0, q_inout: 0.25, length, seed }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, x) in [("p_return", self.p_return), ("q_inout", self.q_inout)] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} = {x} must be finite and positive")));
            }
        }
        if self.length == 0 {
            return Err(Error::InvalidArgument("walk length must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WalkMode {
    Bfs,
    Dfs,
}

impl WalkMode {
    pub fn name(self) -> &'static str {
        match self {
            WalkMode::Bfs => "bfs",
            WalkMode::Dfs => "dfs",
        }
    }

    /// Whether `wp` sits in this mode's regime.
    pub fn in_regime(self, wp: &WalkParams) -> bool {
        match self {
            WalkMode::Bfs => wp.p_return < 1.0 && wp.q_inout > 1.0,
            WalkMode::Dfs => wp.p_return > 1.0 && wp.q_inout < 1.0,
        }
    }
}

impl fmt::Display for WalkMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One walk per node; `paths[v]` starts at `v`.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSet {
    pub mode: WalkMode,
    pub params: WalkParams,
    pub paths: Vec<Vec<NodeId>>,
}

impl PathSet {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let p = &self.params;
        writeln!(
            w,
            "# mode={} p_return={} q_inout={} length={} seed={}",
            self.mode, p.p_return, p.q_inout, p.length, p.seed
        )?;
        for path in &self.paths {
            let ids: Vec<String> = path.iter().map(ToString::to_string).collect();
            writeln!(w, "{}", ids.join(" "))?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut mode = None;
        let mut params = WalkParams { p_return: 1.0, q_inout: 1.0, length: 1, seed: 0 };
        let mut paths = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let bad = |msg: String| Error::Parse { line: i + 1, msg };
            if let Some(header) = line.strip_prefix('#') {
                for kv in header.split_whitespace() {
                    let (k, v) = kv.split_once('=').ok_or_else(|| bad(format!("bad header field {kv:?}")))?;
                    let num = || v.parse::<f64>().map_err(|e| bad(format!("{k}: {e}")));
                    match k {
                        "mode" => {
                            mode = Some(match v {
                                "bfs" => WalkMode::Bfs,
                                "dfs" => WalkMode::Dfs,
                                _ => return Err(bad(format!("unknown mode {v:?}"))),
                            })
                        }
                        "p_return" => params.p_return = num()?,
                        "q_inout" => params.q_inout = num()?,
                        "length" => params.length = num()? as usize,
                        "seed" => params.seed = v.parse().map_err(|e| bad(format!("seed: {e}")))?,
                        _ => return Err(bad(format!("unknown header key {k:?}"))),
                    }
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let path = line
                .split_whitespace()
                .map(|t| t.parse::<NodeId>().map_err(|e| bad(format!("bad node id {t:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            paths.push(path);
        }
        let mode = mode.ok_or(Error::Parse { line: 1, msg: "missing mode header".into() })?;
        Ok(Self { mode, params, paths })
    }
}

/// Unnormalized weights `alpha(cur, x)` over the out-neighbors of `cur` after
/// traversing `prev -> cur`: `1/p` back to `prev`, `1` for nodes adjacent to
/// `prev`, `1/q` otherwise. Sorted by neighbor id; empty at sinks.
pub fn transition_weights(g: &Digraph, prev: NodeId, cur: NodeId, wp: &WalkParams) -> Vec<(NodeId, f64)> {
    g.out_neighbors(cur)
        .iter()
        .map(|&x| {
            let w = match g.undirected_distance_leq2(prev, x) {
                0 => 1.0 / wp.p_return,
                1 => 1.0,
                _ => 1.0 / wp.q_inout,
            };
            (x, w)
        })
        .collect()
}

fn pick<R: Rng>(rng: &mut R, weights: &[(NodeId, f64)]) -> NodeId {
    let total: f64 = weights.iter().map(|w| w.1).sum();
    let mut target = rng.random::<f64>() * total;
    for &(x, w) in weights {
        if target < w {
            return x;
        }
        target -= w;
    }
    weights.last().expect("non-empty candidates").0
}

/// One walk from `start`, deterministic in `(wp.seed, start)`.
///
/// The first step is uniform over out-neighbors; walks stop early at sinks.
pub fn sample_walk(g: &Digraph, start: NodeId, wp: &WalkParams) -> Vec<NodeId> {
    let mut rng = seed::rng(seed::derive_indexed(wp.seed, "walk", start as u64));
    let mut path = Vec::with_capacity(wp.length + 1);
    path.push(start);
    let first = g.out_neighbors(start);
    if first.is_empty() || wp.length == 0 {
        return path;
    }
    path.push(first[rng.random_range(0..first.len())]);
    while path.len() <= wp.length {
        let (prev, cur) = (path[path.len() - 2], path[path.len() - 1]);
        let weights = transition_weights(g, prev, cur, wp);
        if weights.is_empty() {
            break;
        }
        path.push(pick(&mut rng, &weights));
    }
    path
}

/// Walks for every node under one mode; each node's stream is keyed by
/// `(seed, mode, node)` so the result is independent of scheduling.
pub fn sample_paths(g: &Digraph, mode: WalkMode, wp: &WalkParams) -> PathSet {
    let params = WalkParams { seed: seed::derive(wp.seed, mode.name()), ..*wp };
    PathSet { params: *wp, ..sample_paths_seeded(g, mode, &params) }
}

/// Like [`sample_paths`] but keys node streams by `wp.seed` alone, so two
/// modes with equal parameters and seeds produce equal paths.
pub fn sample_paths_seeded(g: &Digraph, mode: WalkMode, wp: &WalkParams) -> PathSet {
    let paths = (0..g.node_count())
        .into_par_iter()
        .map(|v| sample_walk(g, v, wp))
        .collect();
    PathSet { mode, params: *wp, paths }
}

/// BFS-mode and DFS-mode path sets with a shared walk length and root seed.
pub fn sample_path_views(
    g: &Digraph,
    length: usize,
    bfs: &WalkParams,
    dfs: &WalkParams,
    seed: u64,
) -> Result<(PathSet, PathSet)> {
    let bfs = WalkParams { length, seed, ..*bfs };
    let dfs = WalkParams { length, seed, ..*dfs };
    bfs.validate()?;
    dfs.validate()?;
    for (mode, wp) in [(WalkMode::Bfs, &bfs), (WalkMode::Dfs, &dfs)] {
        if !mode.in_regime(wp) {
            log::warn!(
                "{mode} walk parameters p_return={} q_inout={} are outside the {mode} regime",
                wp.p_return,
                wp.q_inout
            );
        }
    }
    Ok((sample_paths(g, WalkMode::Bfs, &bfs), sample_paths(g, WalkMode::Dfs, &dfs)))
}
