//! A laboratory for locally differentially private graph neural networks.
//!
//! Nodes privatize their features with the multi-bit mechanism and their
//! labels with randomized response. The server rectifies the responses,
//! denoises them by neighborhood propagation and trains a two-layer GCN or
//! GraphSAGE model. On top of that pipeline the crate implements four attacks
//! (node injection, label flipping, neighborhood-mean inference and feature
//! poisoning), a domain-validation defense against the last one, and a seeded
//! experiment harness that writes CSV rows.
//!
//! Module map:
//!
//! * [`graph`]: graph and dataset containers, dataset IO, synthetic data
//! * [`ldp`]: encoder, rectifier, randomized response, domain check, ratio audit
//! * [`gnn`]: propagation, GCN/SAGE training, evaluation, gradient checking
//! * [`attacks`]: the four attacks and their metrics
//! * [`harness`]: end-to-end experiments, sweeps and CSV reports

// `!(x > 0.0)` style guards reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attacks;
pub mod gnn;
pub mod graph;
pub mod harness;
pub mod ldp;
pub mod matrix;
pub mod rng;

pub use matrix::DenseMatrix;
