use super::model::{gradient_slices, Aggregator, Model, ModelConfig};
use super::{GnnError, Result};
use crate::graph::Dataset;
use crate::matrix::DenseMatrix;
use crate::rng;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    /// `w ← w − lr · g`
    Sgd,
    /// Adam with β₁ = 0.9, β₂ = 0.999, ε = 1e-8.
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub max_epochs: usize,
    /// Stop after this many epochs without a validation improvement; 0 disables.
    pub patience: usize,
    pub seed: u64,
    pub optimizer: Optimizer,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { learning_rate: 0.05, weight_decay: 5e-4, max_epochs: 300, patience: 50, seed: 0, optimizer: Optimizer::Sgd }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0) || !(self.weight_decay >= 0.0) {
            return Err(GnnError::InvalidConfig("learning_rate and weight_decay must be non-negative".into()));
        }
        if self.max_epochs == 0 {
            return Err(GnnError::InvalidConfig("max_epochs must be at least 1".into()));
        }
        Ok(())
    }
}

/// What the server holds after privatization: one feature row and one
/// training label per node.
#[derive(Debug, Clone, PartialEq)]
pub struct PrivatizedInputs {
    pub features: DenseMatrix,
    pub labels: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub loss: f64,
    pub train_accuracy: f64,
    pub val_accuracy: f64,
}

/// Best-validation weights, their predictions for every node, and the history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub model: Model,
    pub initial: Model,
    pub best_epoch: usize,
    pub history: Vec<EpochStats>,
    pub predictions: Vec<usize>,
}

impl TrainedModel {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Fraction of `mask` nodes whose prediction equals the label.
pub fn accuracy(predictions: &[usize], labels: &[usize], mask: &[bool]) -> Result<f64> {
    if predictions.len() != labels.len() || mask.len() != labels.len() {
        return Err(GnnError::Shape(format!(
            "{} predictions, {} labels, {} mask entries",
            predictions.len(),
            labels.len(),
            mask.len()
        )));
    }
    let (mut hit, mut total) = (0usize, 0usize);
    for ((p, l), &m) in predictions.iter().zip(labels).zip(mask) {
        if m {
            total += 1;
            hit += usize::from(p == l);
        }
    }
    if total == 0 {
        return Err(GnnError::EmptyMask);
    }
    Ok(hit as f64 / total as f64)
}

/// Accuracy of the trained model's predictions against the dataset's true labels.
pub fn evaluate(model: &TrainedModel, dataset: &Dataset, mask: &[bool]) -> Result<f64> {
    accuracy(&model.predictions, dataset.labels(), mask)
}

struct AdamState {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: i32,
}

fn dropout_mask(rows: usize, cols: usize, p: f64, seed: u64, epoch: usize) -> Option<DenseMatrix> {
    if p == 0.0 {
        return None;
    }
    let mut r = rng::stream(seed, "train/dropout", &[epoch as u64]);
    let scale = 1.0 / (1.0 - p);
    let data = (0..rows * cols).map(|_| if r.gen::<f64>() < p { 0.0 } else { scale }).collect();
    Some(DenseMatrix::from_vec(rows, cols, data))
}

/// Full-batch training on the train mask with the privatized labels; model
/// selection by accuracy against the privatized labels on the val mask.
pub fn train(
    dataset: &Dataset,
    model_config: &ModelConfig,
    train_config: &TrainConfig,
    inputs: &PrivatizedInputs,
) -> Result<TrainedModel> {
    train_config.validate()?;
    let n = dataset.num_nodes();
    let c = dataset.num_classes();
    if inputs.features.rows() != n || inputs.labels.len() != n {
        return Err(GnnError::Shape(format!(
            "privatized inputs cover {} feature rows and {} labels for {n} nodes",
            inputs.features.rows(),
            inputs.labels.len()
        )));
    }
    if let Some(&bad) = inputs.labels.iter().find(|&&l| l >= c) {
        return Err(GnnError::Shape(format!("training label {bad} not below num_classes = {c}")));
    }
    if !inputs.features.is_finite() {
        return Err(GnnError::Shape("privatized features contain non-finite values".into()));
    }
    let masks = dataset.masks();
    let mut init_rng = rng::stream(train_config.seed, "train/init", &[]);
    let mut model = Model::init(model_config, inputs.features.cols(), c, &mut init_rng)?;
    let initial = model.clone();
    let agg = Aggregator::new(model_config.architecture, dataset.graph());
    let agg1 = agg.forward(&inputs.features);

    let sizes: Vec<usize> = model.layers.iter().flat_map(|l| [l.weight.as_slice().len(), l.bias.len()]).collect();
    let mut adam = AdamState { m: sizes.iter().map(|&s| vec![0.0; s]).collect(), v: sizes.iter().map(|&s| vec![0.0; s]).collect(), t: 0 };

    let mut history = Vec::new();
    let mut best = (f64::NEG_INFINITY, 0usize, model.clone(), Vec::new());
    for epoch in 0..train_config.max_epochs {
        let keep = dropout_mask(n, model_config.hidden_dim, model_config.dropout, train_config.seed, epoch);
        let (loss, grads) =
            model.loss_and_gradients_with(&agg, &agg1, &inputs.labels, &masks.train, train_config.weight_decay, keep);
        if !loss.is_finite() {
            return Err(GnnError::NonFiniteLoss { epoch });
        }
        let lr = train_config.learning_rate;
        match train_config.optimizer {
            Optimizer::Sgd => {
                for (w, g) in model.parameters_mut().zip(gradient_slices(&grads)) {
                    for (wi, gi) in w.iter_mut().zip(g) {
                        *wi -= lr * gi;
                    }
                }
            }
            Optimizer::Adam => {
                let (b1, b2, eps) = (0.9, 0.999, 1e-8);
                adam.t += 1;
                let (c1, c2) = (1.0 - f64::powi(b1, adam.t), 1.0 - f64::powi(b2, adam.t));
                for (((w, g), m), v) in model.parameters_mut().zip(gradient_slices(&grads)).zip(&mut adam.m).zip(&mut adam.v) {
                    for i in 0..w.len() {
                        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                        w[i] -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + eps);
                    }
                }
            }
        }

        let predictions = softmax_free_argmax(&model.forward_cached(&agg, &agg1, None).logits);
        let train_accuracy = accuracy(&predictions, &inputs.labels, &masks.train)?;
        let val_accuracy = accuracy(&predictions, &inputs.labels, &masks.val)?;
        history.push(EpochStats { epoch, loss, train_accuracy, val_accuracy });
        if val_accuracy > best.0 {
            best = (val_accuracy, epoch, model.clone(), predictions);
        } else if train_config.patience > 0 && epoch - best.1 >= train_config.patience {
            break;
        }
    }
    let (_, best_epoch, model, predictions) = best;
    Ok(TrainedModel { model, initial, best_epoch, history, predictions })
}

fn softmax_free_argmax(logits: &DenseMatrix) -> Vec<usize> {
    // softmax is monotone per row
    logits.argmax_rows()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gnn::Architecture;
    use crate::graph::{Graph, Masks};

    /// Two 6-cliques joined by one edge; class 0 has features [1, 0], class 1 [0, 1].
    pub(crate) fn toy_dataset() -> Dataset {
        let mut edges = Vec::new();
        for block in [0usize, 6] {
            for u in 0..6 {
                for v in u + 1..6 {
                    edges.push((block + u, block + v));
                }
            }
        }
        edges.push((5, 6));
        let graph = Graph::from_edges(12, edges).unwrap();
        let labels: Vec<usize> = (0..12).map(|v| v / 6).collect();
        let features = DenseMatrix::from_vec(12, 2, labels.iter().flat_map(|&l| [1.0 - l as f64, l as f64]).collect());
        let masks = Masks::from_ids(12, &[0, 1, 2, 6, 7, 8], &[3, 9], &[4, 5, 10, 11]).unwrap();
        Dataset::new(graph, features, labels, 2, (0.0, 1.0), masks).unwrap()
    }

    fn clean_inputs(ds: &Dataset) -> PrivatizedInputs {
        PrivatizedInputs { features: ds.features().clone(), labels: ds.labels().to_vec() }
    }

    #[test]
    fn zero_learning_rate_keeps_initial_weights() {
        let ds = toy_dataset();
        let cfg = TrainConfig { learning_rate: 0.0, max_epochs: 2, optimizer: Optimizer::Sgd, ..Default::default() };
        let out = train(&ds, &ModelConfig::default(), &cfg, &clean_inputs(&ds)).unwrap();
        assert_eq!(out.model, out.initial);
        assert_eq!(out.history.len(), 2);
    }

    #[test]
    fn separable_toy_reaches_full_train_accuracy() {
        let ds = toy_dataset();
        for arch in [Architecture::Gcn, Architecture::Sage] {
            for optimizer in [Optimizer::Sgd, Optimizer::Adam] {
                let mc = ModelConfig { architecture: arch, ..Default::default() };
                let lr = if optimizer == Optimizer::Sgd { 0.5 } else { 0.05 };
                let tc = TrainConfig { max_epochs: 200, patience: 0, learning_rate: lr, optimizer, ..Default::default() };
                let out = train(&ds, &mc, &tc, &clean_inputs(&ds)).unwrap();
                let last = out.history.last().unwrap();
                assert_eq!(last.train_accuracy, 1.0, "{arch:?} {optimizer:?}");
                assert_eq!(evaluate(&out, &ds, &ds.masks().test).unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn loss_is_monotone_for_small_steps() {
        let ds = toy_dataset();
        let tc = TrainConfig { learning_rate: 0.05, max_epochs: 150, patience: 0, optimizer: Optimizer::Sgd, ..Default::default() };
        let out = train(&ds, &ModelConfig::default(), &tc, &clean_inputs(&ds)).unwrap();
        for w in out.history.windows(2) {
            assert!(w[1].loss <= w[0].loss + 1e-6, "{:?}", w);
        }
    }

    #[test]
    fn same_seed_same_history() {
        let ds = toy_dataset();
        let mc = ModelConfig { dropout: 0.3, ..Default::default() };
        let tc = TrainConfig { max_epochs: 30, seed: 9, ..Default::default() };
        let a = train(&ds, &mc, &tc, &clean_inputs(&ds)).unwrap();
        let b = train(&ds, &mc, &tc, &clean_inputs(&ds)).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.model, b.model);
    }

    #[test]
    fn accuracy_edge_cases() {
        assert_eq!(accuracy(&[1, 1, 1], &[1, 1, 0], &[true, true, false]).unwrap(), 1.0);
        assert!(matches!(accuracy(&[0], &[0], &[false]), Err(GnnError::EmptyMask)));
        assert!(accuracy(&[0, 1], &[0], &[true]).is_err());
    }

    #[test]
    fn non_finite_inputs_rejected() {
        let ds = toy_dataset();
        let mut inputs = clean_inputs(&ds);
        inputs.features[(0, 0)] = f64::NAN;
        assert!(train(&ds, &ModelConfig::default(), &TrainConfig::default(), &inputs).is_err());
    }

    #[test]
    fn exploding_training_reports_epoch() {
        let ds = toy_dataset();
        let mut inputs = clean_inputs(&ds);
        inputs.features.map_inplace(|v| v * 1e150);
        let tc = TrainConfig { learning_rate: 1e10, optimizer: Optimizer::Sgd, ..Default::default() };
        match train(&ds, &ModelConfig::default(), &tc, &inputs) {
            Err(GnnError::NonFiniteLoss { epoch }) => assert!(epoch < 300),
            other => panic!("expected divergence, got {:?}", other.map(|m| m.best_epoch)),
        }
    }

    #[test]
    fn weights_serialize() {
        let ds = toy_dataset();
        let tc = TrainConfig { max_epochs: 3, ..Default::default() };
        let out = train(&ds, &ModelConfig::default(), &tc, &clean_inputs(&ds)).unwrap();
        let json = out.model.to_json().unwrap();
        let back: Model = serde_json::from_str(&json).unwrap();
        assert_eq!(back, out.model);
    }
}
