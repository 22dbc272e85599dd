use super::propagation::{neighbor_mean_operator, normalize_adjacency, SparseOperator};
use super::{GnnError, Result};
use crate::graph::Graph;
use crate::matrix::DenseMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    /// `H' = Â H W + b` with the symmetric-normalized adjacency.
    Gcn,
    /// `H' = [H | mean_{N(v)} H] W + b`.
    Sage,
}

impl std::fmt::Display for Architecture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Architecture::Gcn => "gcn",
            Architecture::Sage => "sage",
        })
    }
}

impl std::str::FromStr for Architecture {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "gcn" => Ok(Architecture::Gcn),
            "sage" | "graphsage" => Ok(Architecture::Sage),
            other => Err(format!("unknown architecture {other:?} (expected gcn or sage)")),
        }
    }
}

/// Model shape and the propagation depths applied to its inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub architecture: Architecture,
    pub hidden_dim: usize,
    pub dropout: f64,
    /// KProp rounds applied to rectified features.
    pub k_x: usize,
    /// Propagation rounds applied to noisy labels.
    pub k_y: usize,
}

impl ModelConfig {
    pub const NUM_LAYERS: usize = 2;

    pub fn validate(&self) -> Result<()> {
        if self.hidden_dim == 0 {
            return Err(GnnError::InvalidConfig("hidden_dim must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(GnnError::InvalidConfig(format!("dropout = {} not in [0, 1)", self.dropout)));
        }
        Ok(())
    }
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self { architecture: Architecture::Gcn, hidden_dim: 16, dropout: 0.0, k_x: 0, k_y: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weight: DenseMatrix,
    pub bias: Vec<f64>,
}

impl Layer {
    fn zeros_like(&self) -> Layer {
        Layer { weight: DenseMatrix::zeros(self.weight.rows(), self.weight.cols()), bias: vec![0.0; self.bias.len()] }
    }
}

/// Gradients, laid out exactly like [`Model::layers`].
pub type Gradients = Vec<Layer>;

/// Precomputed propagation for one graph.
pub(crate) enum Aggregator {
    Gcn(SparseOperator),
    Sage(SparseOperator),
}

impl Aggregator {
    pub(crate) fn new(architecture: Architecture, graph: &Graph) -> Self {
        match architecture {
            Architecture::Gcn => Aggregator::Gcn(normalize_adjacency(graph)),
            Architecture::Sage => Aggregator::Sage(neighbor_mean_operator(graph)),
        }
    }

    pub(crate) fn forward(&self, h: &DenseMatrix) -> DenseMatrix {
        match self {
            Aggregator::Gcn(op) => op.apply(h),
            Aggregator::Sage(op) => h.hconcat(&op.apply(h)),
        }
    }

    fn backward(&self, grad: &DenseMatrix) -> DenseMatrix {
        match self {
            Aggregator::Gcn(op) => op.apply_transpose(grad),
            Aggregator::Sage(op) => {
                let (own, neighbors) = grad.hsplit(grad.cols() / 2);
                let mut out = own;
                out.add_scaled(&op.apply_transpose(&neighbors), 1.0);
                out
            }
        }
    }

    fn input_multiplier(architecture: Architecture) -> usize {
        match architecture {
            Architecture::Gcn => 1,
            Architecture::Sage => 2,
        }
    }
}

/// Two-layer GCN or SAGE classifier with rectifier activations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub config: ModelConfig,
    pub layers: Vec<Layer>,
}

pub(crate) struct ForwardCache {
    pre1: DenseMatrix,
    /// Dropout scale per hidden unit (0 or 1/(1-p)); `None` when dropout is off.
    keep: Option<DenseMatrix>,
    agg2: DenseMatrix,
    pub(crate) logits: DenseMatrix,
}

impl Model {
    /// Glorot-uniform weights, zero biases.
    pub fn init<R: Rng + ?Sized>(config: &ModelConfig, in_dim: usize, num_classes: usize, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let mult = Aggregator::input_multiplier(config.architecture);
        let mut glorot = |fan_in: usize, fan_out: usize| {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let data = (0..fan_in * fan_out).map(|_| rng.gen_range(-limit..=limit)).collect();
            Layer { weight: DenseMatrix::from_vec(fan_in, fan_out, data), bias: vec![0.0; fan_out] }
        };
        let layers = vec![glorot(mult * in_dim, config.hidden_dim), glorot(mult * config.hidden_dim, num_classes)];
        Ok(Self { config: config.clone(), layers })
    }

    /// All-zero weights with the shapes [`Model::init`] would produce.
    pub fn zeros(config: &ModelConfig, in_dim: usize, num_classes: usize) -> Result<Self> {
        config.validate()?;
        let mult = Aggregator::input_multiplier(config.architecture);
        let layer = |i: usize, o: usize| Layer { weight: DenseMatrix::zeros(i, o), bias: vec![0.0; o] };
        Ok(Self {
            config: config.clone(),
            layers: vec![layer(mult * in_dim, config.hidden_dim), layer(mult * config.hidden_dim, num_classes)],
        })
    }

    pub fn num_classes(&self) -> usize {
        self.layers[1].bias.len()
    }

    fn check_inputs(&self, graph: &Graph, inputs: &DenseMatrix) -> Result<()> {
        let mult = Aggregator::input_multiplier(self.config.architecture);
        if inputs.rows() != graph.num_nodes() || mult * inputs.cols() != self.layers[0].weight.rows() {
            return Err(GnnError::Shape(format!(
                "inputs are {}x{}, model expects {} rows of width {}",
                inputs.rows(),
                inputs.cols(),
                graph.num_nodes(),
                self.layers[0].weight.rows() / mult
            )));
        }
        Ok(())
    }

    /// `agg1` is `agg.forward(inputs)`; inputs are fixed during training, so
    /// callers compute it once.
    pub(crate) fn forward_cached(&self, agg: &Aggregator, agg1: &DenseMatrix, keep: Option<DenseMatrix>) -> ForwardCache {
        let mut pre1 = agg1.matmul(&self.layers[0].weight);
        pre1.add_row_vector(&self.layers[0].bias);
        let mut hidden = pre1.clone();
        hidden.map_inplace(|v| v.max(0.0));
        if let Some(k) = &keep {
            for (h, s) in hidden.as_mut_slice().iter_mut().zip(k.as_slice()) {
                *h *= s;
            }
        }
        let agg2 = agg.forward(&hidden);
        let mut logits = agg2.matmul(&self.layers[1].weight);
        logits.add_row_vector(&self.layers[1].bias);
        ForwardCache { pre1, keep, agg2, logits }
    }

    /// Row-wise class probabilities.
    pub fn predict_proba(&self, graph: &Graph, inputs: &DenseMatrix) -> Result<DenseMatrix> {
        self.check_inputs(graph, inputs)?;
        let agg = Aggregator::new(self.config.architecture, graph);
        Ok(softmax_rows(&self.forward_cached(&agg, &agg.forward(inputs), None).logits))
    }

    /// Argmax class per node.
    pub fn predict(&self, graph: &Graph, inputs: &DenseMatrix) -> Result<Vec<usize>> {
        Ok(self.predict_proba(graph, inputs)?.argmax_rows())
    }

    /// Mean cross-entropy over `mask` plus `weight_decay/2 · Σ‖W‖²`, and its
    /// gradient with respect to every weight and bias. Dropout off.
    pub fn loss_and_gradients(
        &self,
        graph: &Graph,
        inputs: &DenseMatrix,
        targets: &[usize],
        mask: &[bool],
        weight_decay: f64,
    ) -> Result<(f64, Gradients)> {
        self.check_inputs(graph, inputs)?;
        let agg = Aggregator::new(self.config.architecture, graph);
        Ok(self.loss_and_gradients_with(&agg, &agg.forward(inputs), targets, mask, weight_decay, None))
    }

    pub(crate) fn loss_and_gradients_with(
        &self,
        agg: &Aggregator,
        agg1: &DenseMatrix,
        targets: &[usize],
        mask: &[bool],
        weight_decay: f64,
        keep: Option<DenseMatrix>,
    ) -> (f64, Gradients) {
        let cache = self.forward_cached(agg, agg1, keep);
        let probs = softmax_rows(&cache.logits);
        let count = mask.iter().filter(|&&m| m).count().max(1) as f64;

        let mut loss = 0.0;
        let mut d_logits = DenseMatrix::zeros(probs.rows(), probs.cols());
        for v in (0..probs.rows()).filter(|&v| mask[v]) {
            let row = cache.logits.row(v);
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + row.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
            loss += lse - row[targets[v]];
            let g = d_logits.row_mut(v);
            g.copy_from_slice(probs.row(v));
            g[targets[v]] -= 1.0;
            g.iter_mut().for_each(|x| *x /= count);
        }
        loss /= count;
        loss += 0.5 * weight_decay * self.layers.iter().map(|l| l.weight.squared_norm()).sum::<f64>();

        let mut grads: Gradients = self.layers.iter().map(Layer::zeros_like).collect();
        grads[1].weight = cache.agg2.t_matmul(&d_logits);
        grads[1].bias = d_logits.column_sums();
        let d_hidden = agg.backward(&d_logits.matmul_t(&self.layers[1].weight));
        let mut d_pre1 = d_hidden;
        for (i, g) in d_pre1.as_mut_slice().iter_mut().enumerate() {
            let active = cache.pre1.as_slice()[i] > 0.0;
            let scale = cache.keep.as_ref().map_or(1.0, |k| k.as_slice()[i]);
            *g = if active { *g * scale } else { 0.0 };
        }
        grads[0].weight = agg1.t_matmul(&d_pre1);
        grads[0].bias = d_pre1.column_sums();
        for (g, l) in grads.iter_mut().zip(&self.layers) {
            g.weight.add_scaled(&l.weight, weight_decay);
        }
        (loss, grads)
    }

    /// Mutable views of every parameter, in a fixed order.
    pub fn parameters_mut(&mut self) -> impl Iterator<Item = &mut [f64]> {
        self.layers.iter_mut().flat_map(|l| [l.weight.as_mut_slice(), l.bias.as_mut_slice()])
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Flattened views matching [`Model::parameters_mut`].
pub(crate) fn gradient_slices(grads: &Gradients) -> impl Iterator<Item = &[f64]> {
    grads.iter().flat_map(|l| [l.weight.as_slice(), l.bias.as_slice()])
}

/// Numerically stable row softmax.
pub fn softmax_rows(logits: &DenseMatrix) -> DenseMatrix {
    let mut out = logits.clone();
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        row.iter_mut().for_each(|v| *v /= sum);
    }
    out
}
