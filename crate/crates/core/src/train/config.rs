//! Training configuration and its flat `key = value` file format.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neural::{ModelDims, PropagationMode};
use crate::walk::WalkParams;

/// Which path mode accompanies which complex-domain view.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ViewPairing {
    /// Unperturbed Laplacian with BFS paths, perturbed Laplacian with DFS paths.
    #[default]
    Standard,
    /// Unperturbed Laplacian with DFS paths, perturbed Laplacian with BFS paths.
    Crossed,
}

/// Representation handed to downstream classifiers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalEmbedding {
    /// Projection head output.
    Projection,
    /// Encoder output `[NE | PE]` before the projection head.
    #[default]
    Encoder,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub tau: f64,
    pub q0: f64,
    pub r: f64,
    pub delta_q_max: f64,
    pub walk_length: usize,
    pub bfs_p: f64,
    pub bfs_q: f64,
    pub dfs_p: f64,
    pub dfs_q: f64,
    pub layers: usize,
    pub embedding_dim: usize,
    pub readout_hidden: usize,
    pub seed: u64,
    pub view_pairing: ViewPairing,
    pub propagation: PropagationMode,
    pub uncertainty_smoothing: bool,
    /// Ignore edge direction when sampling walks.
    pub walk_undirected: bool,
    /// Both views draw walks from one seed instead of independent streams.
    pub shared_walk_seed: bool,
    pub eval_embedding: EvalEmbedding,
    pub probe_iterations: usize,
    pub probe_l2: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            learning_rate: 1e-3,
            tau: 0.5,
            q0: 0.25,
            r: 0.5,
            delta_q_max: 0.05,
            walk_length: 4,
            bfs_p: 0.25,
            bfs_q: 4.0,
            dfs_p: 4.0,
            dfs_q: 0.25,
            layers: 2,
            embedding_dim: 64,
            readout_hidden: 128,
            seed: 0,
            view_pairing: ViewPairing::Standard,
            propagation: PropagationMode::Complex,
            uncertainty_smoothing: false,
            walk_undirected: false,
            shared_walk_seed: false,
            eval_embedding: EvalEmbedding::Encoder,
            probe_iterations: 500,
            probe_l2: 1e-4,
        }
    }
}

const KEYS: &[&str] = &[
    "epochs",
    "learning_rate",
    "tau",
    "q0",
    "r",
    "delta_q_max",
    "walk_length",
    "bfs_p",
    "bfs_q",
    "dfs_p",
    "dfs_q",
    "layers",
    "embedding_dim",
    "readout_hidden",
    "seed",
    "view_pairing",
    "propagation",
    "uncertainty_smoothing",
    "walk_undirected",
    "shared_walk_seed",
    "eval_embedding",
    "probe_iterations",
    "probe_l2",
];

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
}

impl TrainConfig {
    pub fn model_dims(&self, input: usize) -> ModelDims {
        ModelDims { input, readout_hidden: self.readout_hidden, embedding: self.embedding_dim }
    }

    pub fn bfs_params(&self) -> WalkParams {
        WalkParams { p_return: self.bfs_p, q_inout: self.bfs_q, length: self.walk_length, seed: self.seed }
    }

    pub fn dfs_params(&self) -> WalkParams {
        WalkParams { p_return: self.dfs_p, q_inout: self.dfs_q, length: self.walk_length, seed: self.seed }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return bad(format!("tau must be > 0, got {}", self.tau));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate must be > 0, got {}", self.learning_rate));
        }
        if !(self.q0 > 0.0 && self.q0 <= 0.25) {
            return bad(format!("q0 must lie in (0, 0.25], got {}", self.q0));
        }
        if !(0.0..=1.0).contains(&self.r) {
            return bad(format!("r must lie in [0, 1], got {}", self.r));
        }
        if !(self.delta_q_max >= 0.0 && self.delta_q_max.is_finite()) {
            return bad(format!("delta_q_max must be >= 0, got {}", self.delta_q_max));
        }
        for (name, v) in [("bfs_p", self.bfs_p), ("bfs_q", self.bfs_q), ("dfs_p", self.dfs_p), ("dfs_q", self.dfs_q)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be > 0, got {v}"));
            }
        }
        if self.embedding_dim == 0 || self.readout_hidden == 0 {
            return bad("layer widths must be positive".into());
        }
        if !(self.probe_l2 >= 0.0 && self.probe_l2.is_finite()) {
            return bad(format!("probe_l2 must be >= 0, got {}", self.probe_l2));
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment. Missing keys keep
    /// their defaults, unknown or repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(Error::Config(format!("line {}: unknown key `{key}`", i + 1)));
            }
            if seen.contains(&key) {
                return Err(Error::Config(format!("line {}: duplicate key `{key}`", i + 1)));
            }
            seen.push(key);
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "epochs" => self.epochs = parse_value(key, v)?,
            "learning_rate" => self.learning_rate = parse_value(key, v)?,
            "tau" => self.tau = parse_value(key, v)?,
            "q0" => self.q0 = parse_value(key, v)?,
            "r" => self.r = parse_value(key, v)?,
            "delta_q_max" => self.delta_q_max = parse_value(key, v)?,
            "walk_length" => self.walk_length = parse_value(key, v)?,
            "bfs_p" => self.bfs_p = parse_value(key, v)?,
            "bfs_q" => self.bfs_q = parse_value(key, v)?,
            "dfs_p" => self.dfs_p = parse_value(key, v)?,
            "dfs_q" => self.dfs_q = parse_value(key, v)?,
            "layers" => self.layers = parse_value(key, v)?,
            "embedding_dim" => self.embedding_dim = parse_value(key, v)?,
            "readout_hidden" => self.readout_hidden = parse_value(key, v)?,
            "seed" => self.seed = parse_value(key, v)?,
            "view_pairing" => {
                self.view_pairing = match v {
                    "standard" => ViewPairing::Standard,
                    "crossed" => ViewPairing::Crossed,
                    _ => return Err(Error::Config(format!("invalid value `{v}` for `{key}`"))),
                }
            }
            "propagation" => self.propagation = PropagationMode::parse(v)?,
            "uncertainty_smoothing" => self.uncertainty_smoothing = parse_value(key, v)?,
            "walk_undirected" => self.walk_undirected = parse_value(key, v)?,
            "shared_walk_seed" => self.shared_walk_seed = parse_value(key, v)?,
            "eval_embedding" => {
                self.eval_embedding = match v {
                    "projection" => EvalEmbedding::Projection,
                    "encoder" => EvalEmbedding::Encoder,
                    _ => return Err(Error::Config(format!("invalid value `{v}` for `{key}`"))),
                }
            }
            "probe_iterations" => self.probe_iterations = parse_value(key, v)?,
            "probe_l2" => self.probe_l2 = parse_value(key, v)?,
            _ => unreachable!("key list and setter disagree on `{key}`"),
        }
        Ok(())
    }

    /// Every key, one per line, in a form [`TrainConfig::parse`] reads back exactly.
    pub fn to_config_string(&self) -> String {
        let pairing = match self.view_pairing {
            ViewPairing::Standard => "standard",
            ViewPairing::Crossed => "crossed",
        };
        let embedding = match self.eval_embedding {
            EvalEmbedding::Projection => "projection",
            EvalEmbedding::Encoder => "encoder",
        };
        let mut s = String::new();
        let mut put = |k: &str, v: String| writeln!(s, "{k} = {v}").expect("writing to a String");
        put("epochs", self.epochs.to_string());
        put("learning_rate", self.learning_rate.to_string());
        put("tau", self.tau.to_string());
        put("q0", self.q0.to_string());
        put("r", self.r.to_string());
        put("delta_q_max", self.delta_q_max.to_string());
        put("walk_length", self.walk_length.to_string());
        put("bfs_p", self.bfs_p.to_string());
        put("bfs_q", self.bfs_q.to_string());
        put("dfs_p", self.dfs_p.to_string());
        put("dfs_q", self.dfs_q.to_string());
        put("layers", self.layers.to_string());
        put("embedding_dim", self.embedding_dim.to_string());
        put("readout_hidden", self.readout_hidden.to_string());
        put("seed", self.seed.to_string());
        put("view_pairing", pairing.into());
        put("propagation", self.propagation.name().into());
        put("uncertainty_smoothing", self.uncertainty_smoothing.to_string());
        put("walk_undirected", self.walk_undirected.to_string());
        put("shared_walk_seed", self.shared_walk_seed.to_string());
        put("eval_embedding", embedding.into());
        put("probe_iterations", self.probe_iterations.to_string());
        put("probe_l2", self.probe_l2.to_string());
        s
    }
}
