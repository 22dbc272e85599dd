//! The four attacks against the private pipeline.
//!
//! * [`inject_nodes`]: black-box injection of random nodes attached to the
//!   highest-degree nodes.
//! * [`flip_labels`]: relabels the highest-degree nodes before privatization.
//! * [`infer_features_mean`]: estimates a node's features as the mean of the
//!   rectified responses in its closed neighborhood.
//! * [`compute_poison`] / [`apply_poison`] / [`poison_inference`]: shifts
//!   targeted features so that the encoder can never emit `+1` for an original
//!   `alpha`, then reads the original values back from the `+1` responses.

mod flip;
mod inference;
mod injection;
mod metrics;
mod poison;

pub use flip::{flip_labels, flip_targets, LabelFlipConfig};
pub use inference::{infer_features_mean, infer_features_mean_encoded, InferenceResult};
pub use injection::{inject_nodes, plan_injection, FeatureMode, InjectionDomain, NodeInjectionConfig};
pub use metrics::{cosine_similarity, mean_feature_difference, Cosine};
pub use poison::{apply_poison, compute_poison, poison_inference, PoisonConfig, PoisonInferenceResult, ValueDomain, Verdict};

use crate::graph::GraphError;
use crate::ldp::LdpError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AttackError {
    #[error("invalid attack configuration: {0}")]
    InvalidConfig(String),
    #[error("vectors of different lengths: {0} and {1}")]
    LengthMismatch(usize, usize),
    #[error("no response available for node {0}")]
    MissingResponse(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Ldp(#[from] LdpError),
}

pub type Result<T> = std::result::Result<T, AttackError>;

/// `ceil(rate · n)`, the number of nodes an attack at `rate` touches.
pub fn attacked_count(rate: f64, n: usize) -> usize {
    (rate * n as f64).ceil() as usize
}

fn check_rate(rate: f64) -> Result<()> {
    if rate > 0.0 && rate <= 1.0 {
        Ok(())
    } else {
        Err(AttackError::InvalidConfig(format!("rate = {rate} must lie in (0, 1]")))
    }
}
