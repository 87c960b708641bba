//! Two-view contrastive training.

pub mod adam;
pub mod config;
pub mod loss;
pub mod trainer;
pub mod views;

pub use adam::{adam_step, AdamState};
pub use config::{EvalEmbedding, TrainConfig, ViewPairing};
pub use loss::{cosine_similarity, info_nce, info_nce_grad, LossGrad, LossValue, NORM_FLOOR};
pub use trainer::{
    embed, epoch_seed, full_loss, full_loss_and_grad, init_model, train, Checkpoint, LossTrace, TraceRow, TrainOutcome,
};
pub use views::{build_views, LaplacianKind, Provenance, ViewContext, ViewPair};
