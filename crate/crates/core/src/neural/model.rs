//! Full encoder: complex readout and path GRU, fused by a projection head.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::gru::{Gru, GruCache};
use super::mlp::{Mlp, MlpCache};
use super::tensor::{hcat, hsplit, Param, Parameters};
use crate::error::{Error, Result};
use crate::graph::NodeId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDims {
    /// Raw feature width `d`.
    pub input: usize,
    pub readout_hidden: usize,
    /// Width of each encoder output and of the projected embedding.
    pub embedding: usize,
}

/// Inputs of one view: propagated complex features `[Re | Im]` and one path per node.
#[derive(Clone, Debug)]
pub struct ViewInput {
    pub propagated: DMatrix<f64>,
    pub paths: Vec<Vec<NodeId>>,
}

/// Forward intermediates of one view.
#[derive(Clone, Debug)]
pub struct ViewCache {
    readout: MlpCache,
    gru: GruCache,
    projection: MlpCache,
    /// Readout encoder output.
    pub node_embedding: DMatrix<f64>,
    /// Path encoder output.
    pub path_embedding: DMatrix<f64>,
}

impl ViewCache {
    /// `[NE | PE]`, the encoder representation before projection.
    pub fn encoder_output(&self) -> DMatrix<f64> {
        hcat(&self.node_embedding, &self.path_embedding)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub dims: ModelDims,
    pub readout: Mlp,
    pub gru: Gru,
    pub projection: Mlp,
}

/// One serialized tensor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorRecord {
    pub name: String,
    pub shape: [usize; 2],
    /// Row-major values.
    pub data: Vec<f64>,
}

impl ModelParams {
    pub fn new<R: Rng>(dims: ModelDims, rng: &mut R) -> Self {
        Self {
            dims,
            readout: Mlp::new(2 * dims.input, dims.readout_hidden, dims.embedding, rng),
            gru: Gru::new(dims.input, dims.embedding, rng),
            projection: Mlp::new(2 * dims.embedding, dims.embedding, dims.embedding, rng),
        }
    }

    pub fn zeros(dims: ModelDims) -> Self {
        Self {
            dims,
            readout: Mlp::zeros(2 * dims.input, dims.readout_hidden, dims.embedding),
            gru: Gru::zeros(dims.input, dims.embedding),
            projection: Mlp::zeros(2 * dims.embedding, dims.embedding, dims.embedding),
        }
    }

    /// Projected embeddings of one view.
    pub fn forward_view(&self, view: &ViewInput, features: &DMatrix<f64>) -> Result<(DMatrix<f64>, ViewCache)> {
        if view.paths.len() != view.propagated.nrows() {
            return Err(Error::Shape(format!(
                "{} paths for {} nodes",
                view.paths.len(),
                view.propagated.nrows()
            )));
        }
        let (node_embedding, readout) = self.readout.forward(&view.propagated)?;
        let (path_embedding, gru) = self.gru.forward(&view.paths, features)?;
        let (out, projection) = self.projection.forward(&hcat(&node_embedding, &path_embedding))?;
        Ok((out, ViewCache { readout, gru, projection, node_embedding, path_embedding }))
    }

    /// Accumulates gradients of every parameter from `dL/dE`.
    pub fn backward_view(&mut self, cache: &ViewCache, d_out: &DMatrix<f64>, n_features: usize) {
        let d_cat = self.projection.backward(&cache.projection, d_out);
        let (d_ne, d_pe) = hsplit(&d_cat, self.dims.embedding);
        self.readout.backward(&cache.readout, &d_ne);
        self.gru.backward(&cache.gru, &d_pe, n_features);
    }

    pub fn to_records(&self) -> Vec<TensorRecord> {
        self.params()
            .into_iter()
            .map(|(name, p)| {
                let (r, c) = p.shape();
                TensorRecord { name, shape: [r, c], data: p.value.transpose().as_slice().to_vec() }
            })
            .collect()
    }

    /// Rebuilds parameters, checking every name and shape against `dims`.
    pub fn from_records(dims: ModelDims, records: &[TensorRecord]) -> Result<Self> {
        let mut model = Self::zeros(dims);
        let expected = model.params().len();
        if records.len() != expected {
            return Err(Error::Checkpoint(format!("expected {expected} tensors, found {}", records.len())));
        }
        for (name, p) in model.params_mut() {
            let rec = records
                .iter()
                .find(|r| r.name == name)
                .ok_or_else(|| Error::Checkpoint(format!("missing tensor `{name}`")))?;
            let (r, c) = p.shape();
            if rec.shape != [r, c] || rec.data.len() != r * c {
                return Err(Error::Checkpoint(format!(
                    "tensor `{name}` has shape {:?} with {} values, expected [{r}, {c}]",
                    rec.shape,
                    rec.data.len()
                )));
            }
            if rec.data.iter().any(|v| !v.is_finite()) {
                return Err(Error::Checkpoint(format!("tensor `{name}` holds non-finite values")));
            }
            p.value = DMatrix::from_row_slice(r, c, &rec.data);
        }
        Ok(model)
    }

    /// Whether every gradient entry is finite; names the first offender otherwise.
    pub fn check_finite_grads(&self) -> Result<()> {
        for (name, p) in self.params() {
            if p.grad.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteGradient(name));
            }
        }
        Ok(())
    }
}

impl Parameters for ModelParams {
    fn params(&self) -> Vec<(String, &Param)> {
        let mut out = self.readout.named("readout");
        out.extend(self.gru.named("gru"));
        out.extend(self.projection.named("projection"));
        out
    }

    fn params_mut(&mut self) -> Vec<(String, &mut Param)> {
        let mut out = self.readout.named_mut("readout");
        out.extend(self.gru.named_mut("gru"));
        out.extend(self.projection.named_mut("projection"));
        out
    }
}
