use thiserror::Error;

/// Errors raised across the library.
#[derive(Error, Debug)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("row {row}: {msg}")]
    Feature { row: usize, msg: String },
    #[error("empty input")]
    EmptyInput,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("degenerate uncertainty field: mean uncertainty is zero")]
    DegenerateUncertainty,
    #[error("uncertainty undefined on a graph without edges")]
    NoEdges,
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("near-degenerate spectrum (min gap {gap:e}), theorem hypothesis violated")]
    NearDegenerate { gap: f64 },
    #[error("intra term undefined for fewer than two nodes")]
    IntraUndefined,
    #[error("class {0} has no training examples")]
    MissingClass(usize),
    #[error("graph too small: {0}")]
    TooSmall(String),
    #[error("non-finite gradient in tensor `{0}`")]
    NonFiniteGradient(String),
    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    Diverged { epoch: usize, loss: f64 },
    #[error("config: {0}")]
    Config(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
