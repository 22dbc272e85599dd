use super::{HarnessError, Result};
use crate::attacks::FeatureMode;
use crate::gnn::{Architecture, ModelConfig, TrainConfig};
use crate::graph::SyntheticConfig;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

/// Where a run's graph comes from.
///
/// In JSON: `{"synthetic": {...}}` or `{"path": "data/syn"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSource {
    Synthetic(SyntheticConfig),
    Path(PathBuf),
}

impl DatasetSource {
    /// Short identifier for the `dataset` CSV column.
    pub fn label(&self) -> String {
        match self {
            DatasetSource::Path(p) => p.display().to_string(),
            DatasetSource::Synthetic(c) => format!(
                "synthetic-n{}-c{}-d{}-p{}-q{}-s{}",
                c.num_nodes, c.num_classes, c.d, c.intra_edge_prob, c.inter_edge_prob, c.feature_signal
            ),
        }
    }
}

impl Default for DatasetSource {
    fn default() -> Self {
        DatasetSource::Synthetic(SyntheticConfig::default())
    }
}

/// In JSON: `{"kind": "flip", "rate": 0.1}`, `{"kind": "infer", "targets": 10}`, ...
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttackSpec {
    #[default]
    None,
    /// Fake nodes, `ceil(rate · n)` of them.
    Inject { rate: f64 },
    /// Wrong labels on the `ceil(rate · n)` highest-degree nodes.
    Flip { rate: f64 },
    /// Mean inference on this many highest-degree nodes.
    Infer { targets: usize },
    /// Poison on `ceil(fraction · n)` random nodes.
    Poison { fraction: f64 },
}

impl AttackSpec {
    pub fn name(&self) -> &'static str {
        match self {
            AttackSpec::None => "none",
            AttackSpec::Inject { .. } => "inject",
            AttackSpec::Flip { .. } => "flip",
            AttackSpec::Infer { .. } => "infer",
            AttackSpec::Poison { .. } => "poison",
        }
    }

    /// The attack's single numeric knob.
    pub fn param(&self) -> Option<f64> {
        match *self {
            AttackSpec::None => None,
            AttackSpec::Inject { rate } | AttackSpec::Flip { rate } => Some(rate),
            AttackSpec::Infer { targets } => Some(targets as f64),
            AttackSpec::Poison { fraction } => Some(fraction),
        }
    }

    /// Whether the run ends in a trained model (as opposed to an estimator).
    pub fn trains(&self) -> bool {
        matches!(self, AttackSpec::None | AttackSpec::Inject { .. } | AttackSpec::Flip { .. })
    }
}

/// One experiment: a dataset, a mechanism, an attack and a model, run
/// `repeats` times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    pub architecture: Architecture,
    /// Feature budget; ignored when `private` is false.
    pub eps_x: f64,
    /// Label budget; ignored when `private` is false.
    pub eps_y: f64,
    /// Dimensions each node reports.
    pub m: usize,
    pub k_x: usize,
    pub k_y: usize,
    pub attack: AttackSpec,
    pub defense_enabled: bool,
    /// `false` skips both mechanisms: the server sees raw features and labels.
    pub private: bool,
    pub seed: u64,
    pub repeats: usize,
    pub hidden_dim: usize,
    pub dropout: f64,
    /// `train.seed` is ignored; each repeat derives its own.
    pub train: TrainConfig,
    pub injection_features: FeatureMode,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetSource::default(),
            architecture: Architecture::Gcn,
            eps_x: 8.0,
            eps_y: 4.0,
            m: 16,
            k_x: 4,
            k_y: 4,
            attack: AttackSpec::None,
            defense_enabled: false,
            private: true,
            seed: 0,
            repeats: 5,
            hidden_dim: 16,
            dropout: 0.0,
            train: TrainConfig::default(),
            injection_features: FeatureMode::UniformRange,
        }
    }
}

impl ExperimentConfig {
    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            architecture: self.architecture,
            hidden_dim: self.hidden_dim,
            dropout: self.dropout,
            k_x: self.k_x,
            k_y: self.k_y,
        }
    }

    /// Checks everything that can be checked without loading data.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if !(self.eps_x > 0.0) || !(self.eps_y > 0.0) {
            return bad(format!("eps_x = {} and eps_y = {} must be positive", self.eps_x, self.eps_y));
        }
        if self.repeats == 0 {
            return bad("repeats must be at least 1".into());
        }
        if self.m == 0 {
            return bad("m must be at least 1".into());
        }
        if let DatasetSource::Synthetic(s) = &self.dataset {
            s.validate()?;
            if self.m > s.d {
                return bad(format!("m = {} exceeds the feature dimension {}", self.m, s.d));
            }
        }
        match self.attack {
            AttackSpec::None => {}
            AttackSpec::Inject { rate } | AttackSpec::Flip { rate } => {
                if !(rate > 0.0 && rate <= 1.0) {
                    return bad(format!("attack rate {rate} is outside (0, 1]"));
                }
            }
            AttackSpec::Infer { targets } => {
                if targets == 0 {
                    return bad("inference needs at least one target".into());
                }
            }
            AttackSpec::Poison { fraction } => {
                if !(fraction > 0.0 && fraction <= 1.0) {
                    return bad(format!("poison fraction {fraction} is outside (0, 1]"));
                }
                if !self.private {
                    return bad("the poisoning attack targets the encoder and needs private = true".into());
                }
            }
        }
        self.model_config().validate()?;
        self.train.validate()?;
        Ok(())
    }
}

/// A field [`run_sweep`](super::run_sweep) can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// The attack's knob: rate, target count or poison fraction.
    Rate,
    EpsX,
    EpsY,
    KX,
    KY,
}

impl SweepAxis {
    /// `base` with the axis set to `value`.
    pub fn apply(&self, base: &ExperimentConfig, value: f64) -> Result<ExperimentConfig> {
        let mut cfg = base.clone();
        let hops = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as usize)
            } else {
                Err(HarnessError::Config(format!("hop count {v} is not a non-negative integer")))
            }
        };
        match self {
            SweepAxis::EpsX => cfg.eps_x = value,
            SweepAxis::EpsY => cfg.eps_y = value,
            SweepAxis::KX => cfg.k_x = hops(value)?,
            SweepAxis::KY => cfg.k_y = hops(value)?,
            SweepAxis::Rate => {
                cfg.attack = match base.attack {
                    AttackSpec::None => {
                        return Err(HarnessError::Config("the rate axis needs an attack in the base config".into()))
                    }
                    AttackSpec::Inject { .. } => AttackSpec::Inject { rate: value },
                    AttackSpec::Flip { .. } => AttackSpec::Flip { rate: value },
                    AttackSpec::Infer { .. } => AttackSpec::Infer { targets: hops(value)? },
                    AttackSpec::Poison { .. } => AttackSpec::Poison { fraction: value },
                }
            }
        }
        Ok(cfg)
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::Rate => "rate",
            SweepAxis::EpsX => "eps_x",
            SweepAxis::EpsY => "eps_y",
            SweepAxis::KX => "k_x",
            SweepAxis::KY => "k_y",
        })
    }
}

impl FromStr for SweepAxis {
    type Err = HarnessError;

    /// Accepts `rate` (also `inject-rate`, `flip-rate`, `targets`, `fraction`),
    /// `eps_x`, `eps_y`, `k_x`, `k_y`; dashes and underscores are interchangeable.
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "rate" | "inject_rate" | "flip_rate" | "targets" | "fraction" => Ok(SweepAxis::Rate),
            "eps_x" => Ok(SweepAxis::EpsX),
            "eps_y" => Ok(SweepAxis::EpsY),
            "k_x" | "kx" | "x_step" => Ok(SweepAxis::KX),
            "k_y" | "ky" | "y_step" => Ok(SweepAxis::KY),
            _ => Err(HarnessError::Config(format!(
                "unknown sweep axis {s:?}; expected one of rate, eps_x, eps_y, k_x, k_y"
            ))),
        }
    }
}
