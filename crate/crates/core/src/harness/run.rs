use super::config::{AttackSpec, DatasetSource, ExperimentConfig, SweepAxis};
use super::{HarnessError, Result};
use crate::attacks::{
    apply_poison, attacked_count, compute_poison, flip_labels, infer_features_mean, inject_nodes, poison_inference,
    LabelFlipConfig, NodeInjectionConfig, ValueDomain,
};
use crate::gnn::{accuracy, drop_pseudo_labels_masked, kprop, train, PrivatizedInputs, TrainConfig};
use crate::graph::{generate_synthetic, load_dataset, top_k_by_degree, Dataset};
use crate::ldp::{
    multibit_encode, multibit_rectify, randomized_response, validate_feature_domain, EncodedVector, MbmParams,
    RectifiedVector, RrParams,
};
use crate::matrix::DenseMatrix;
use crate::rng;
use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// The metrics one run produces; which variant depends on the attack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Metrics {
    /// Runs that train a model (`none`, `inject`, `flip`).
    Accuracy { test_accuracy: f64 },
    /// Means over the targets of the cosine similarity, its absolute value, and
    /// the mean absolute difference between predicted and true features.
    Inference { cosine: f64, abs_cosine: f64, mean_fd: f64 },
    /// `success_rate` is `None` when nothing could be inferred.
    Poison { success_rate: Option<f64>, num_inferences: usize, num_targets: usize, exact_verdicts: usize },
}

/// One repeat of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    /// Rerunning this config with `repeats` covering `repeat` reproduces the row.
    pub config: ExperimentConfig,
    pub repeat: usize,
    pub metrics: Metrics,
    /// Nodes whose features failed the domain check and were replaced.
    pub detections: usize,
    pub wall_time_s: f64,
}

impl ResultRow {
    pub fn test_accuracy(&self) -> Option<f64> {
        match self.metrics {
            Metrics::Accuracy { test_accuracy } => Some(test_accuracy),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Runs every repeat of `config` and returns one row per repeat, in order.
///
/// Repeat `r` draws its dataset (when synthetic) and every random choice from
/// streams derived from `(config.seed, r)`, so rows do not depend on how many
/// repeats run or in which order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let loaded = prepare(config)?;
    (0..config.repeats).into_par_iter().map(|r| run_repeat(config, loaded.as_ref(), r)).collect()
}

/// Runs `base` once per value of `axis`, rows in axis order then repeat order.
pub fn run_sweep_rows(base: &ExperimentConfig, axis: SweepAxis, values: &[f64]) -> Result<Vec<ResultRow>> {
    if values.is_empty() {
        return Err(HarnessError::Config("a sweep needs at least one value".into()));
    }
    let points: Vec<ExperimentConfig> = values.iter().map(|&v| axis.apply(base, v)).collect::<Result<_>>()?;
    let loaded: Vec<Option<Dataset>> = points.iter().map(prepare).collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> =
        points.iter().enumerate().flat_map(|(i, p)| (0..p.repeats).map(move |r| (i, r))).collect();
    jobs.into_par_iter().map(|(i, r)| run_repeat(&points[i], loaded[i].as_ref(), r)).collect()
}

/// [`run_sweep_rows`] rendered as CSV.
pub fn run_sweep(base: &ExperimentConfig, axis: SweepAxis, values: &[f64]) -> Result<String> {
    super::table::to_csv(&run_sweep_rows(base, axis, values)?)
}

/// Validates the config and loads a file dataset, so that errors surface
/// before any repeat starts.
fn prepare(config: &ExperimentConfig) -> Result<Option<Dataset>> {
    config.validate()?;
    let DatasetSource::Path(path) = &config.dataset else { return Ok(None) };
    let ds = load_dataset(path)?;
    if config.m > ds.feature_dim() {
        return Err(HarnessError::Config(format!(
            "m = {} exceeds the feature dimension {} of {}",
            config.m,
            ds.feature_dim(),
            path.display()
        )));
    }
    if let AttackSpec::Infer { targets } = config.attack {
        if targets > ds.num_nodes() {
            return Err(HarnessError::Config(format!("{targets} inference targets but only {} nodes", ds.num_nodes())));
        }
    }
    Ok(Some(ds))
}

/// What the server ends up holding, plus what the attacks need to score themselves.
struct Collected {
    rectified: Vec<RectifiedVector>,
    encoded: Vec<Option<EncodedVector>>,
    noisy_labels: Vec<usize>,
    detections: usize,
}

fn collect(config: &ExperimentConfig, ds: &Dataset, features: &DenseMatrix, root: u64) -> Result<Collected> {
    let n = ds.num_nodes();
    if !config.private {
        return Ok(Collected {
            rectified: (0..n).map(|v| RectifiedVector::from_vec(features.row(v).to_vec())).collect(),
            encoded: vec![None; n],
            noisy_labels: ds.labels().to_vec(),
            detections: 0,
        });
    }
    let params = MbmParams::new(config.eps_x, ds.alpha(), ds.beta(), ds.feature_dim(), config.m)?;
    let rr = RrParams::new(config.eps_y, ds.num_classes())?;
    let midpoint = RectifiedVector::from_vec(vec![params.midpoint(); ds.feature_dim()]);
    let per_node: Vec<(Option<EncodedVector>, RectifiedVector, usize)> = (0..n)
        .into_par_iter()
        .map(|v| -> Result<_> {
            let x = features.row(v);
            let label = randomized_response(ds.labels()[v], &rr, &mut rng::stream(root, "ldp/rr", &[v as u64]))?;
            // the domain check runs inside the trusted encoder; a flagged node sends nothing
            if config.defense_enabled && !validate_feature_domain(x, ds.alpha(), ds.beta()).is_ok() {
                return Ok((None, midpoint.clone(), label));
            }
            let enc = multibit_encode(x, &params, &mut rng::stream(root, "ldp/encode", &[v as u64]))?;
            let rect = multibit_rectify(&enc, &params)?;
            Ok((Some(enc), rect, label))
        })
        .collect::<Result<_>>()?;
    let mut out = Collected { rectified: Vec::with_capacity(n), encoded: Vec::with_capacity(n), noisy_labels: Vec::with_capacity(n), detections: 0 };
    for (enc, rect, label) in per_node {
        out.detections += usize::from(enc.is_none());
        out.encoded.push(enc);
        out.rectified.push(rect);
        out.noisy_labels.push(label);
    }
    Ok(out)
}

fn run_repeat(config: &ExperimentConfig, loaded: Option<&Dataset>, repeat: usize) -> Result<ResultRow> {
    let start = Instant::now();
    let r = repeat as u64;
    let root = rng::derive_key(config.seed, "repeat", &[r]);
    let clean = match (&config.dataset, loaded) {
        (_, Some(ds)) => ds.clone(),
        (DatasetSource::Synthetic(sc), None) => generate_synthetic(sc, rng::derive_key(config.seed, "dataset", &[r]))?,
        (DatasetSource::Path(p), None) => load_dataset(p)?,
    };

    let ds = match config.attack {
        AttackSpec::Inject { rate } => {
            let cfg = NodeInjectionConfig::new(rate, config.injection_features);
            inject_nodes(&clean, &cfg, &mut rng::stream(root, "attack/inject", &[]))?
        }
        AttackSpec::Flip { rate } => flip_labels(&clean, &LabelFlipConfig { rate }, &mut rng::stream(root, "attack/flip", &[]))?,
        _ => clean.clone(),
    };

    if let AttackSpec::Infer { targets } = config.attack {
        if targets > ds.num_nodes() {
            return Err(HarnessError::Config(format!("{targets} inference targets but only {} nodes", ds.num_nodes())));
        }
    }

    let mut features = ds.features().clone();
    let mut poison_targets = Vec::new();
    let mut params = None;
    if let AttackSpec::Poison { fraction } = config.attack {
        let p = MbmParams::new(config.eps_x, ds.alpha(), ds.beta(), ds.feature_dim(), config.m)?;
        let count = attacked_count(fraction, ds.num_nodes());
        poison_targets = sample(&mut rng::stream(root, "attack/poison", &[]), ds.num_nodes(), count).into_vec();
        poison_targets.sort_unstable();
        features = apply_poison(&features, &poison_targets, compute_poison(&p));
        params = Some(p);
    }

    let collected = collect(config, &ds, &features, root)?;

    let metrics = match config.attack {
        AttackSpec::Infer { targets } => {
            let targets = top_k_by_degree(ds.graph(), targets)?;
            let res = infer_features_mean(&collected.rectified, ds.graph(), &targets, ds.features())?;
            Metrics::Inference {
                cosine: res.mean_cosine(),
                abs_cosine: res.mean_abs_cosine(),
                mean_fd: res.mean_feature_difference(),
            }
        }
        AttackSpec::Poison { .. } => {
            let params = params.expect("poison params are set above");
            let responses: Vec<(usize, EncodedVector)> = poison_targets
                .iter()
                .filter_map(|&t| collected.encoded[t].clone().map(|e| (t, e)))
                .collect();
            let domain = if ds.is_binary() { ValueDomain::Binary } else { ValueDomain::General };
            let res = poison_inference(&responses, &poison_targets, &params, domain, ds.features())?;
            Metrics::Poison {
                success_rate: res.success_rate,
                num_inferences: res.num_inferences,
                num_targets: poison_targets.len(),
                exact_verdicts: res.exact_verdicts(),
            }
        }
        AttackSpec::None | AttackSpec::Inject { .. } | AttackSpec::Flip { .. } => {
            let rect = DenseMatrix::from_rows(
                &collected.rectified.iter().map(|v| v.entries()).collect::<Vec<_>>(),
                ds.feature_dim(),
            );
            let x = kprop(&rect, ds.graph(), config.k_x)?;
            let masks = ds.masks();
            let known: Vec<bool> = masks.train.iter().zip(&masks.val).map(|(t, v)| *t || *v).collect();
            let labels = drop_pseudo_labels_masked(&collected.noisy_labels, &known, ds.graph(), config.k_y, ds.num_classes())?;
            let train_cfg = TrainConfig { seed: rng::derive_key(root, "train", &[]), ..config.train.clone() };
            let trained = train(&ds, &config.model_config(), &train_cfg, &PrivatizedInputs { features: x, labels })?;
            // score against the labels before any flipping; injected nodes are never tested
            let mut truth = clean.labels().to_vec();
            truth.extend_from_slice(&ds.labels()[clean.num_nodes()..]);
            Metrics::Accuracy { test_accuracy: accuracy(&trained.predictions, &truth, &masks.test)? }
        }
    };

    let mut echo = config.clone();
    echo.repeats = echo.repeats.max(repeat + 1);
    Ok(ResultRow { config: echo, repeat, metrics, detections: collected.detections, wall_time_s: start.elapsed().as_secs_f64() })
}
