//! Training loop, loss traces, checkpoints, and frozen embeddings.

use std::io::{BufRead, Write};
use std::time::Instant;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamState};
use super::config::{EvalEmbedding, TrainConfig};
use super::loss::{info_nce_grad, LossValue};
use super::views::ViewContext;
use crate::error::{Error, Result};
use crate::graph::Digraph;
use crate::neural::{ModelParams, Parameters, TensorRecord, ViewInput};
use crate::seed;

/// One line of the loss trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub epoch: usize,
    pub inter: f64,
    pub intra: f64,
    pub total: f64,
    pub wall_ms: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LossTrace(pub Vec<TraceRow>);

impl LossTrace {
    pub const HEADER: &'static str = "epoch,L_inter,L_intra,L_total,wall_ms";

    pub fn rows(&self) -> &[TraceRow] {
        &self.0
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", Self::HEADER)?;
        for r in &self.0 {
            writeln!(w, "{},{},{},{},{:.3}", r.epoch, r.inter, r.intra, r.total, r.wall_ms)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if i == 0 || line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            let bad = || Error::Parse { line: i + 1, msg: format!("malformed trace row `{line}`") };
            if f.len() != 5 {
                return Err(bad());
            }
            let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
            rows.push(TraceRow {
                epoch: f[0].trim().parse().map_err(|_| bad())?,
                inter: num(f[1])?,
                intra: num(f[2])?,
                total: num(f[3])?,
                wall_ms: num(f[4])?,
            });
        }
        Ok(Self(rows))
    }

    /// Loss columns only; wall-clock time is excluded.
    pub fn losses(&self) -> Vec<[f64; 3]> {
        self.0.iter().map(|r| [r.inter, r.intra, r.total]).collect()
    }
}

/// Seed of the views built in `epoch`.
pub fn epoch_seed(cfg: &TrainConfig, epoch: usize) -> u64 {
    seed::derive_indexed(cfg.seed, "epoch", epoch as u64)
}

/// Freshly initialized parameters for `cfg`.
pub fn init_model(cfg: &TrainConfig, input_dim: usize) -> ModelParams {
    ModelParams::new(cfg.model_dims(input_dim), &mut seed::stream_rng(cfg.seed, "init"))
}

/// Full objective on fixed view inputs.
pub fn full_loss(model: &ModelParams, views: &[ViewInput; 2], features: &DMatrix<f64>, tau: f64) -> Result<LossValue> {
    let (e1, _) = model.forward_view(&views[0], features)?;
    let (e2, _) = model.forward_view(&views[1], features)?;
    super::loss::info_nce(&e1, &e2, tau)
}

/// Full objective on fixed view inputs; refills every parameter gradient.
pub fn full_loss_and_grad(
    model: &mut ModelParams,
    views: &[ViewInput; 2],
    features: &DMatrix<f64>,
    tau: f64,
) -> Result<LossValue> {
    model.zero_grad();
    let (e1, c1) = model.forward_view(&views[0], features)?;
    let (e2, c2) = model.forward_view(&views[1], features)?;
    let lg = info_nce_grad(&e1, &e2, tau)?;
    let n = features.nrows();
    model.backward_view(&c1, &lg.d_e1, n);
    model.backward_view(&c2, &lg.d_e2, n);
    Ok(lg.value)
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: ModelParams,
    pub trace: LossTrace,
}

/// Runs `cfg.epochs` epochs of view rebuilding, loss, backprop and Adam.
///
/// Each trace row records the loss before that epoch's update.
pub fn train(graph: &Digraph, features: &DMatrix<f64>, cfg: &TrainConfig) -> Result<TrainOutcome> {
    let ctx = ViewContext::new(graph, features, cfg)?;
    if graph.node_count() < 2 {
        return Err(Error::IntraUndefined);
    }
    let mut model = init_model(cfg, features.ncols());
    let mut adam = AdamState::new(&model);
    let mut trace = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        let start = Instant::now();
        let (inputs, _) = ctx.inputs(cfg, epoch_seed(cfg, epoch))?;
        let loss = full_loss_and_grad(&mut model, &inputs, ctx.features(), cfg.tau)?;
        if !loss.total.is_finite() {
            return Err(Error::Diverged { epoch, loss: loss.total });
        }
        adam_step(&mut model, &mut adam, cfg.learning_rate)?;
        let wall_ms = start.elapsed().as_secs_f64() * 1e3;
        log::debug!("epoch {epoch}: L_total={:.6}", loss.total);
        trace.push(TraceRow { epoch, inter: loss.inter, intra: loss.intra, total: loss.total, wall_ms });
    }
    Ok(TrainOutcome { model, trace: LossTrace(trace) })
}

/// Frozen node embeddings on the deterministic unperturbed view.
pub fn embed(model: &ModelParams, ctx: &ViewContext, cfg: &TrainConfig) -> Result<DMatrix<f64>> {
    let (e, cache) = model.forward_view(&ctx.eval_input(cfg), ctx.features())?;
    Ok(match cfg.eval_embedding {
        EvalEmbedding::Projection => e,
        EvalEmbedding::Encoder => cache.encoder_output(),
    })
}

pub const CHECKPOINT_VERSION: u32 = 1;

/// Serialized model with the configuration it was trained under.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub config: TrainConfig,
    pub nodes: usize,
    pub input_dim: usize,
    pub tensors: Vec<TensorRecord>,
}

impl Checkpoint {
    pub fn new(model: &ModelParams, cfg: &TrainConfig, nodes: usize) -> Self {
        Self {
            version: CHECKPOINT_VERSION,
            config: cfg.clone(),
            nodes,
            input_dim: model.dims.input,
            tensors: model.to_records(),
        }
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    pub fn read_json<R: std::io::Read>(r: R) -> Result<Self> {
        let ck: Self = serde_json::from_reader(r)?;
        if ck.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported checkpoint version {}", ck.version)));
        }
        ck.config.validate()?;
        Ok(ck)
    }

    /// Rebuilds the model, validating every tensor shape against the stored config.
    pub fn model(&self) -> Result<ModelParams> {
        ModelParams::from_records(self.config.model_dims(self.input_dim), &self.tensors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (Digraph, DMatrix<f64>) {
        let g = Digraph::new(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3)]);
        let x = DMatrix::from_fn(6, 4, |i, j| ((i * 4 + j) as f64 * 0.61).cos());
        (g, x)
    }

    fn small(epochs: usize) -> TrainConfig {
        TrainConfig { epochs, embedding_dim: 8, readout_hidden: 16, learning_rate: 1e-2, ..TrainConfig::default() }
    }

    #[test]
    fn zero_epochs_returns_initial_model() {
        let (g, x) = toy();
        let cfg = small(0);
        let out = train(&g, &x, &cfg).unwrap();
        assert!(out.trace.rows().is_empty());
        assert_eq!(out.model, init_model(&cfg, 4));
    }

    #[test]
    fn toy_loss_decreases_early() {
        let (g, x) = toy();
        let out = train(&g, &x, &small(50)).unwrap();
        let first: f64 = out.trace.rows()[..3].iter().map(|r| r.total).sum();
        let later: f64 = out.trace.rows()[7..10].iter().map(|r| r.total).sum();
        assert!(later < first, "{first} -> {later}");
        assert!(out.trace.rows().iter().all(|r| r.inter >= 0.0));
    }

    #[test]
    fn same_seed_same_trace() {
        let (g, x) = toy();
        let a = train(&g, &x, &small(5)).unwrap();
        let b = train(&g, &x, &small(5)).unwrap();
        assert_eq!(a.trace.losses(), b.trace.losses());
        assert_eq!(a.model, b.model);
    }

    #[test]
    fn checkpoint_and_trace_round_trip() {
        let (g, x) = toy();
        let cfg = small(2);
        let out = train(&g, &x, &cfg).unwrap();
        let ck = Checkpoint::new(&out.model, &cfg, 6);
        let mut buf = Vec::new();
        ck.write_json(&mut buf).unwrap();
        let back = Checkpoint::read_json(buf.as_slice()).unwrap();
        assert_eq!(back.model().unwrap().to_records(), out.model.to_records());
        let mut csv = Vec::new();
        out.trace.write_csv(&mut csv).unwrap();
        let trace = LossTrace::read_csv(csv.as_slice()).unwrap();
        assert_eq!(trace.losses(), out.trace.losses());
    }
}
