//! Client-side local differential privacy mechanisms and their server-side
//! counterparts.
//!
//! * [`MultiBitEncoder`] perturbs a feature row into a vector over
//!   `{-1, 0, +1}` with exactly `m` nonzero entries.
//! * [`multibit_rectify`] maps an encoded vector back to an unbiased estimate.
//! * [`randomized_response`] perturbs a class label.
//! * [`validate_feature_domain`] is the client-side range check that detects
//!   poisoned rows.
//! * [`empirical_ldp_ratio`] estimates per-dimension output-probability ratios
//!   by simulation and [`analytic_max_ratio`] computes them exactly.

mod audit;
mod defense;
mod mbm;
mod rr;

pub use audit::{analytic_max_ratio, empirical_ldp_ratio, output_probabilities, DimensionRatio, ProportionEstimate, RatioAudit, RatioEstimate};
pub use defense::{validate_feature_domain, DomainReport, DomainViolation};
pub use mbm::{bernoulli_param, multibit_encode, multibit_rectify, EncodedVector, MbmParams, MultiBitEncoder, RectifiedVector};
pub use rr::{randomized_response, RrParams};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LdpError {
    #[error("invalid mechanism parameters: {0}")]
    InvalidParams(String),
    #[error("expected a vector of length {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("label {label} not below num_classes = {num_classes}")]
    LabelOutOfRange { label: usize, num_classes: usize },
    #[error("encoded entries must be -1, 0 or +1; found {0}")]
    InvalidEncoding(i8),
    #[error("ratio audit needs at least {min} trials, got {trials}")]
    TooFewTrials { trials: usize, min: usize },
}

pub type Result<T> = std::result::Result<T, LdpError>;
