//! Construction of the two augmented views for one epoch.

use nalgebra::{DMatrix, DVector};

use super::config::{TrainConfig, ViewPairing};
use crate::error::{Error, Result};
use crate::graph::Digraph;
use crate::magnetic::{build_phase, personalized_charge, sample_perturbed_phase, symmetrize, ChargeField, PerturbationSpec, PhaseField};
use crate::neural::{hcat, ModelParams, PropagationOperator, ViewCache, ViewInput};
use crate::seed;
use crate::walk::{sample_paths_seeded, WalkMode, WalkParams};

/// Which Laplacian fed a view's complex branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LaplacianKind {
    Personalized,
    Perturbed,
}

/// Where a view came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub laplacian: LaplacianKind,
    pub walks: WalkMode,
}

/// Projected embeddings of both views, rows aligned by node id.
#[derive(Clone, Debug)]
pub struct ViewPair {
    pub e1: DMatrix<f64>,
    pub e2: DMatrix<f64>,
    pub provenance: [Provenance; 2],
    pub caches: [ViewCache; 2],
}

/// Everything about a graph that stays fixed across epochs.
#[derive(Clone, Debug)]
pub struct ViewContext {
    graph: Digraph,
    walk_graph: Digraph,
    features: DMatrix<f64>,
    charges: ChargeField,
    a_s: DMatrix<f64>,
    d_s: DVector<f64>,
    base: DMatrix<f64>,
}

impl ViewContext {
    pub fn new(graph: &Digraph, features: &DMatrix<f64>, cfg: &TrainConfig) -> Result<Self> {
        cfg.validate()?;
        if features.nrows() != graph.node_count() {
            return Err(Error::Shape(format!(
                "{} feature rows for {} nodes",
                features.nrows(),
                graph.node_count()
            )));
        }
        let charges = personalized_charge(graph, cfg.q0, cfg.uncertainty_smoothing)?;
        let (a_s, d_s) = symmetrize(graph);
        let walk_graph = if cfg.walk_undirected { graph.to_undirected() } else { graph.clone() };
        let mut ctx = Self {
            graph: graph.clone(),
            walk_graph,
            features: features.clone(),
            charges,
            a_s,
            d_s,
            base: DMatrix::zeros(0, 0),
        };
        let phase = PhaseField::from_map(ctx.charges.iter().collect());
        ctx.base = ctx.propagate(&phase, cfg)?;
        Ok(ctx)
    }

    pub fn graph(&self) -> &Digraph {
        &self.graph
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn charges(&self) -> &ChargeField {
        &self.charges
    }

    /// `[Re | Im]` after `cfg.layers` propagation steps from `X_real = X_imag = X`.
    fn propagate(&self, phase: &PhaseField, cfg: &TrainConfig) -> Result<DMatrix<f64>> {
        let op = PropagationOperator::new(&self.a_s, &self.d_s, &build_phase(&self.graph, phase))?;
        let (re, im) = op.propagate(&self.features, &self.features, cfg.layers, cfg.propagation)?;
        Ok(hcat(&re, &im))
    }

    fn paths(&self, mode: WalkMode, cfg: &TrainConfig, walk_seed: u64) -> Vec<Vec<usize>> {
        let wp = match mode {
            WalkMode::Bfs => cfg.bfs_params(),
            WalkMode::Dfs => cfg.dfs_params(),
        };
        sample_paths_seeded(&self.walk_graph, mode, &WalkParams { seed: walk_seed, ..wp }).paths
    }

    fn modes(cfg: &TrainConfig) -> [WalkMode; 2] {
        match cfg.view_pairing {
            ViewPairing::Standard => [WalkMode::Bfs, WalkMode::Dfs],
            ViewPairing::Crossed => [WalkMode::Dfs, WalkMode::Bfs],
        }
    }

    /// Model inputs for both views under `epoch_seed`.
    pub fn inputs(&self, cfg: &TrainConfig, epoch_seed: u64) -> Result<([ViewInput; 2], [Provenance; 2])> {
        let spec = PerturbationSpec { r: cfg.r, delta_q_max: cfg.delta_q_max, seed: seed::derive(epoch_seed, "phase") };
        spec.validate()?;
        let perturbed = self.propagate(&sample_perturbed_phase(&self.charges, &spec), cfg)?;
        let (s1, s2) = if cfg.shared_walk_seed {
            let s = seed::derive(epoch_seed, "walks");
            (s, s)
        } else {
            (seed::derive(epoch_seed, "walks/view1"), seed::derive(epoch_seed, "walks/view2"))
        };
        let [m1, m2] = Self::modes(cfg);
        let (p1, p2) = rayon::join(|| self.paths(m1, cfg, s1), || self.paths(m2, cfg, s2));
        Ok((
            [ViewInput { propagated: self.base.clone(), paths: p1 }, ViewInput { propagated: perturbed, paths: p2 }],
            [
                Provenance { laplacian: LaplacianKind::Personalized, walks: m1 },
                Provenance { laplacian: LaplacianKind::Perturbed, walks: m2 },
            ],
        ))
    }

    /// Deterministic unperturbed view used to embed nodes after training.
    pub fn eval_input(&self, cfg: &TrainConfig) -> ViewInput {
        let mode = Self::modes(cfg)[0];
        ViewInput { propagated: self.base.clone(), paths: self.paths(mode, cfg, seed::derive(cfg.seed, "eval/walks")) }
    }
}

/// Both views under `epoch_seed`, passed through `model`.
pub fn build_views(ctx: &ViewContext, model: &ModelParams, cfg: &TrainConfig, epoch_seed: u64) -> Result<ViewPair> {
    let (inputs, provenance) = ctx.inputs(cfg, epoch_seed)?;
    let (e1, c1) = model.forward_view(&inputs[0], ctx.features())?;
    let (e2, c2) = model.forward_view(&inputs[1], ctx.features())?;
    Ok(ViewPair { e1, e2, provenance, caches: [c1, c2] })
}
