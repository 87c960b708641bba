//! Directed graph storage, text I/O and small structural queries.

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Write};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub type NodeId = usize;

/// A simple directed graph on dense node ids `0..n`.
///
/// Edges are deduplicated, self-loop free and kept sorted; `out_adj` and
/// `in_adj` hold sorted neighbor lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    edges: Vec<(NodeId, NodeId)>,
    out_adj: Vec<Vec<NodeId>>,
    in_adj: Vec<Vec<NodeId>>,
}

/// Result of building a graph from raw pairs.
#[derive(Clone, Debug)]
pub struct LoadedGraph {
    pub graph: Digraph,
    pub dropped_self_loops: usize,
    pub dropped_duplicates: usize,
    /// `id_map[i]` is the original id of dense node `i`, when ids were remapped.
    pub id_map: Option<Vec<u64>>,
}

impl Digraph {
    /// Builds a graph, dropping self-loops and duplicate edges.
    pub fn from_edges(n: usize, raw: impl IntoIterator<Item = (NodeId, NodeId)>) -> Result<LoadedGraph> {
        let mut set = BTreeSet::new();
        let mut loops = 0;
        let mut dups = 0;
        for (u, v) in raw {
            if u >= n || v >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({u}, {v}) out of range for {n} nodes"
                )));
            }
            if u == v {
                loops += 1;
            } else if !set.insert((u, v)) {
                dups += 1;
            }
        }
        let graph = Self::from_sorted_unique(n, set.into_iter().collect());
        Ok(LoadedGraph {
            graph,
            dropped_self_loops: loops,
            dropped_duplicates: dups,
            id_map: None,
        })
    }

    /// Like [`Digraph::from_edges`] but panics on invalid input; for literals in tests
    /// and generators that already guarantee a simple graph.
    pub fn new(n: usize, edges: &[(NodeId, NodeId)]) -> Self {
        Self::from_edges(n, edges.iter().copied())
            .expect("edge endpoints in range")
            .graph
    }

    fn from_sorted_unique(n: usize, edges: Vec<(NodeId, NodeId)>) -> Self {
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        for &(u, v) in &edges {
            out_adj[u].push(v);
            in_adj[v].push(u);
        }
        // out lists are already sorted by construction; in lists are too, since
        // edges are visited in (u, v) order.
        Self { n, edges, out_adj, in_adj }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn out_neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.out_adj[v]
    }

    pub fn in_neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.in_adj[v]
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.out_adj[u].binary_search(&v).is_ok()
    }

    /// True when an edge joins `u` and `v` in either direction.
    pub fn adjacent(&self, u: NodeId, v: NodeId) -> bool {
        self.has_edge(u, v) || self.has_edge(v, u)
    }

    /// Returns `(d_in, d_out)`.
    pub fn degrees(&self) -> (Vec<usize>, Vec<usize>) {
        let d_in = self.in_adj.iter().map(Vec::len).collect();
        let d_out = self.out_adj.iter().map(Vec::len).collect();
        (d_in, d_out)
    }

    /// Distance between `u` and `x` on the underlying undirected graph, capped at 2.
    ///
    /// Only meaningful for walk candidates, where `x` is an out-neighbor of a node
    /// adjacent to `u`, so the true distance never exceeds 2.
    pub fn undirected_distance_leq2(&self, u: NodeId, x: NodeId) -> u8 {
        if u == x {
            0
        } else if self.adjacent(u, x) {
            1
        } else {
            2
        }
    }

    /// The same node set with every edge reversed.
    pub fn reversed(&self) -> Self {
        let mut edges: Vec<_> = self.edges.iter().map(|&(u, v)| (v, u)).collect();
        edges.sort_unstable();
        Self::from_sorted_unique(self.n, edges)
    }

    /// The underlying undirected graph, stored as a symmetric digraph.
    pub fn to_undirected(&self) -> Self {
        let set: BTreeSet<_> = self
            .edges
            .iter()
            .flat_map(|&(u, v)| [(u, v), (v, u)])
            .collect();
        Self::from_sorted_unique(self.n, set.into_iter().collect())
    }

    /// Keeps the node set, replacing the edge set.
    pub fn with_edges(&self, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        Ok(Self::from_edges(self.n, edges.iter().copied())?.graph)
    }

    /// Relabels node `v` as `perm[v]`.
    pub fn permuted(&self, perm: &[NodeId]) -> Self {
        assert_eq!(perm.len(), self.n);
        let mut edges: Vec<_> = self.edges.iter().map(|&(u, v)| (perm[u], perm[v])).collect();
        edges.sort_unstable();
        Self::from_sorted_unique(self.n, edges)
    }

    /// Dense 0/1 adjacency matrix.
    pub fn adjacency(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for &(u, v) in &self.edges {
            a[(u, v)] = 1.0;
        }
        a
    }

    /// Writes the edge list with a `# nodes=N` header.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# nodes={}", self.n)?;
        for &(u, v) in &self.edges {
            writeln!(w, "{u}\t{v}")?;
        }
        Ok(())
    }
}

enum Line {
    Skip,
    Header(usize),
    Edge(u64, u64),
}

fn parse_line(lineno: usize, line: &str) -> Result<Line> {
    let t = line.trim();
    if t.is_empty() {
        return Ok(Line::Skip);
    }
    if let Some(comment) = t.strip_prefix('#') {
        if let Some(val) = comment.trim().strip_prefix("nodes=") {
            let n = val.trim().parse::<usize>().map_err(|e| Error::Parse {
                line: lineno,
                msg: format!("bad node-count header: {e}"),
            })?;
            return Ok(Line::Header(n));
        }
        return Ok(Line::Skip);
    }
    let mut parts = t.split('\t');
    let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(Error::Parse {
            line: lineno,
            msg: format!("expected `src<TAB>dst`, got {t:?}"),
        });
    };
    let parse = |s: &str| {
        s.trim().parse::<u64>().map_err(|e| Error::Parse {
            line: lineno,
            msg: format!("bad node id {s:?}: {e}"),
        })
    };
    Ok(Line::Edge(parse(a)?, parse(b)?))
}

fn read_pairs<R: BufRead>(reader: R) -> Result<(Option<usize>, Vec<(u64, u64)>)> {
    let mut header = None;
    let mut pairs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        match parse_line(i + 1, &line?)? {
            Line::Skip => {}
            Line::Header(n) => header = Some(n),
            Line::Edge(u, v) => pairs.push((u, v)),
        }
    }
    if pairs.is_empty() && header.is_none() {
        return Err(Error::EmptyInput);
    }
    Ok((header, pairs))
}

/// Reads a `src<TAB>dst` edge list keeping node ids as given.
///
/// `n` is `1 + max id`, or the `# nodes=N` header when present.
pub fn load_edge_list<R: BufRead>(reader: R) -> Result<LoadedGraph> {
    let (header, pairs) = read_pairs(reader)?;
    let max_id = pairs.iter().map(|&(u, v)| u.max(v)).max();
    let implied = max_id.map_or(0, |m| m as usize + 1);
    let n = match header {
        Some(h) if h < implied => {
            return Err(Error::Parse {
                line: 0,
                msg: format!("header declares {h} nodes but ids reach {}", implied - 1),
            })
        }
        Some(h) => h,
        None => implied,
    };
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    Digraph::from_edges(n, pairs.into_iter().map(|(u, v)| (u as usize, v as usize)))
}

/// Reads an edge list with arbitrary ids, remapping them to `0..n` in order of
/// first appearance.
pub fn load_edge_list_remapped<R: BufRead>(reader: R) -> Result<LoadedGraph> {
    let (_, pairs) = read_pairs(reader)?;
    if pairs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut index: HashMap<u64, usize> = HashMap::new();
    let mut id_map = Vec::new();
    let mut dense = |id: u64| {
        *index.entry(id).or_insert_with(|| {
            id_map.push(id);
            id_map.len() - 1
        })
    };
    let mapped: Vec<_> = pairs.iter().map(|&(u, v)| (dense(u), dense(v))).collect();
    let mut loaded = Digraph::from_edges(id_map.len(), mapped)?;
    loaded.id_map = Some(id_map);
    Ok(loaded)
}

/// Dense node features, one row per node.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix(pub DMatrix<f64>);

impl FeatureMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite feature value".into()));
        }
        Ok(Self(values))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for row in self.0.row_iter() {
            let cells: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// Reads a headerless numeric CSV with exactly `n` rows.
pub fn load_features<R: BufRead>(reader: R, n: usize) -> Result<FeatureMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let row = rows.len();
        let cells = t
            .split(',')
            .map(|c| {
                let c = c.trim();
                match c.parse::<f64>() {
                    Ok(x) if x.is_finite() => Ok(x),
                    _ => Err(Error::Feature { row, msg: format!("non-numeric cell {c:?}") }),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != cells.len() {
                return Err(Error::Feature {
                    row,
                    msg: format!("expected {} columns, found {}", first.len(), cells.len()),
                });
            }
        }
        rows.push(cells);
    }
    if rows.len() != n {
        return Err(Error::Feature {
            row: rows.len(),
            msg: format!("expected {n} rows, found {}", rows.len()),
        });
    }
    let d = rows.first().map_or(0, Vec::len);
    Ok(FeatureMatrix(DMatrix::from_fn(n, d, |i, j| rows[i][j])))
}

/// Reads one non-negative integer label per line (first CSV column).
pub fn load_labels<R: BufRead>(reader: R) -> Result<Vec<usize>> {
    let mut labels = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let cell = t.split(',').next().unwrap_or("").trim();
        let y = cell.parse::<usize>().map_err(|_| Error::Feature {
            row: labels.len(),
            msg: format!("bad label {cell:?}"),
        })?;
        labels.push(y);
    }
    Ok(labels)
}

pub fn write_labels<W: Write>(labels: &[usize], mut w: W) -> std::io::Result<()> {
    for y in labels {
        writeln!(w, "{y}")?;
    }
    Ok(())
}
