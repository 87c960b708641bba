//! Encoders, their manual backward passes, and gradient verification.

pub mod gradcheck;
pub mod gru;
pub mod mlp;
pub mod model;
pub mod propagation;
pub mod tensor;

pub use gradcheck::{gradient_check, GradCheckReport, TensorCheck, GRADCHECK_EPS};
pub use gru::{Gru, GruCache};
pub use mlp::{Activation, Linear, Mlp, MlpCache};
pub use model::{ModelDims, ModelParams, TensorRecord, ViewCache, ViewInput};
pub use propagation::{PropagationMode, PropagationOperator};
pub use tensor::{hcat, hsplit, sigmoid, Param, Parameters};
