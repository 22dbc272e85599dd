//! Dense two-layer GNNs with hand-derived gradients.
//!
//! The server side of the private pipeline lives here: K-hop mean propagation
//! of rectified features, label propagation into pseudo-labels, and a GCN or
//! GraphSAGE classifier trained by full-batch optimization.

mod gradcheck;
mod model;
mod propagation;
mod train;

pub use gradcheck::grad_check;
pub use model::{Architecture, Gradients, Layer, Model, ModelConfig};
pub use propagation::{
    drop_pseudo_labels, drop_pseudo_labels_masked, kprop, mean_operator, neighbor_mean_operator,
    normalize_adjacency, SparseOperator,
};
pub use train::{accuracy, evaluate, train, EpochStats, Optimizer, PrivatizedInputs, TrainConfig, TrainedModel};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GnnError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("non-finite training loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("evaluation mask selects no nodes")]
    EmptyMask,
    #[error("cannot serialize model: {0}")]
    Serialize(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, GnnError>;
