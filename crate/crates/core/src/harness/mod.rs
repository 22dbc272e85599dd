//! Seeded end-to-end experiments.
//!
//! A run goes: pre-encoding attack (inject, flip or poison), per-node feature
//! encoding and label randomized response, server-side rectification (with the
//! optional domain check), feature propagation, label propagation, training and
//! evaluation. Inference and poisoning runs stop after collection and score
//! their estimators instead of training.
//!
//! ```
//! use lpgnn_lab::harness::{run_experiment, AttackSpec, ExperimentConfig};
//!
//! let cfg = ExperimentConfig { attack: AttackSpec::Poison { fraction: 0.05 }, repeats: 1, ..Default::default() };
//! let rows = run_experiment(&cfg)?;
//! println!("{}", rows[0].to_json()?);
//! # Ok::<(), lpgnn_lab::harness::HarnessError>(())
//! ```

mod config;
mod run;
mod table;

pub use config::{AttackSpec, DatasetSource, ExperimentConfig, SweepAxis};
pub use run::{run_experiment, run_sweep, run_sweep_rows, Metrics, ResultRow};
pub use table::{summarize_csv, to_csv, Report, ReportGroup, Summary, CSV_HEADER};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment: {0}")]
    Config(String),
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
    #[error(transparent)]
    Ldp(#[from] crate::ldp::LdpError),
    #[error(transparent)]
    Gnn(#[from] crate::gnn::GnnError),
    #[error(transparent)]
    Attack(#[from] crate::attacks::AttackError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;
