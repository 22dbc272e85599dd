use super::{Dataset, Graph, GraphError, Masks, Result};
use crate::matrix::DenseMatrix;
use crate::rng;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Planted-partition dataset parameters.
///
/// The default `d = 512` is deliberately wide. With few features and one
/// reported dimension per node, the neighborhood mean of rectified responses
/// concentrates enough to leak features.
///
/// Classes own contiguous blocks of `d / num_classes` features. A node's own
/// block is on with probability `feature_signal`, every other feature with
/// probability `1 - feature_signal`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub num_nodes: usize,
    pub num_classes: usize,
    pub d: usize,
    pub intra_edge_prob: f64,
    pub inter_edge_prob: f64,
    pub feature_signal: f64,
    /// (train, val, test)
    pub split_fractions: (f64, f64, f64),
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            num_nodes: 1000,
            num_classes: 4,
            d: 512,
            intra_edge_prob: 0.05,
            inter_edge_prob: 0.005,
            feature_signal: 0.9,
            split_fractions: (0.5, 0.25, 0.25),
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(GraphError::InvalidConfig(msg));
        if self.num_nodes < 3 {
            return bad(format!("num_nodes = {} leaves a split empty", self.num_nodes));
        }
        if self.num_classes == 0 || self.d == 0 {
            return bad("num_classes and d must be positive".into());
        }
        if !self.d.is_multiple_of(self.num_classes) {
            return bad(format!(
                "d = {} is not divisible by num_classes = {}; each class needs an equal feature block",
                self.d, self.num_classes
            ));
        }
        for (name, p) in [
            ("intra_edge_prob", self.intra_edge_prob),
            ("inter_edge_prob", self.inter_edge_prob),
            ("feature_signal", self.feature_signal),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} is not a probability"));
            }
        }
        if self.intra_edge_prob <= self.inter_edge_prob {
            return bad("intra_edge_prob must exceed inter_edge_prob".into());
        }
        let (a, b, c) = self.split_fractions;
        if [a, b, c].iter().any(|f| !(0.0..=1.0).contains(f)) || (a + b + c - 1.0).abs() > 1e-9 {
            return bad(format!("split fractions ({a}, {b}, {c}) must be in [0,1] and sum to 1"));
        }
        Ok(())
    }
}

/// Generates a binary-feature planted-partition dataset (`alpha = 0`, `beta = 1`).
///
/// The output is a pure function of `(config, seed)`.
pub fn generate_synthetic(config: &SyntheticConfig, seed: u64) -> Result<Dataset> {
    config.validate()?;
    let n = config.num_nodes;
    let c = config.num_classes;
    let block = config.d / c;

    let mut label_rng = rng::stream(seed, "synthetic/labels", &[]);
    let labels: Vec<usize> = (0..n).map(|_| label_rng.gen_range(0..c)).collect();

    let mut edge_rng = rng::stream(seed, "synthetic/edges", &[]);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if labels[u] == labels[v] { config.intra_edge_prob } else { config.inter_edge_prob };
            if edge_rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    let graph = Graph::from_edges(n, edges)?;

    let mut feature_rng = rng::stream(seed, "synthetic/features", &[]);
    let mut data = Vec::with_capacity(n * config.d);
    for &label in &labels {
        for j in 0..config.d {
            let p = if j / block == label { config.feature_signal } else { 1.0 - config.feature_signal };
            data.push(if feature_rng.gen_bool(p) { 1.0 } else { 0.0 });
        }
    }
    let features = DenseMatrix::from_vec(n, config.d, data);

    let mut split_rng = rng::stream(seed, "synthetic/splits", &[]);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut split_rng);
    let n_train = (config.split_fractions.0 * n as f64).round() as usize;
    let n_val = (config.split_fractions.1 * n as f64).round() as usize;
    let n_val = n_val.min(n - n_train);
    let (train, rest) = order.split_at(n_train);
    let (val, test) = rest.split_at(n_val);
    if train.is_empty() || val.is_empty() || test.is_empty() {
        return Err(GraphError::InvalidConfig(format!(
            "split fractions {:?} leave a split empty for {n} nodes",
            config.split_fractions
        )));
    }
    let masks = Masks::from_ids(n, train, val, test)?;
    Dataset::new(graph, features, labels, c, (0.0, 1.0), masks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SyntheticConfig {
        SyntheticConfig { num_nodes: 80, num_classes: 2, d: 8, ..Default::default() }
    }

    #[test]
    fn deterministic_in_seed() {
        let a = generate_synthetic(&small(), 11).unwrap();
        let b = generate_synthetic(&small(), 11).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate_synthetic(&small(), 12).unwrap());
    }

    #[test]
    fn two_cliques_when_probabilities_are_extreme() {
        let cfg = SyntheticConfig { intra_edge_prob: 1.0, inter_edge_prob: 0.0, ..small() };
        let ds = generate_synthetic(&cfg, 5).unwrap();
        let labels = ds.labels();
        for u in 0..ds.num_nodes() {
            let same = labels.iter().filter(|&&l| l == labels[u]).count();
            assert_eq!(ds.graph().degree(u), same - 1);
            assert!(ds.graph().neighbors(u).iter().all(|&v| labels[v] == labels[u]));
        }
    }

    #[test]
    fn full_signal_lights_the_class_block() {
        let cfg = SyntheticConfig { feature_signal: 1.0, ..small() };
        let ds = generate_synthetic(&cfg, 9).unwrap();
        for (row, &label) in ds.features().row_iter().zip(ds.labels()) {
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(v, if j / 4 == label { 1.0 } else { 0.0 });
            }
        }
        assert!(ds.is_binary());
    }

    #[test]
    fn rejects_indivisible_dimension() {
        let cfg = SyntheticConfig { d: 10, num_classes: 4, ..Default::default() };
        let err = generate_synthetic(&cfg, 0).unwrap_err();
        assert!(err.to_string().contains("not divisible"));
    }

    #[test]
    fn rejects_bad_probabilities() {
        assert!(SyntheticConfig { intra_edge_prob: 0.01, inter_edge_prob: 0.02, ..small() }.validate().is_err());
        assert!(SyntheticConfig { feature_signal: 1.5, ..small() }.validate().is_err());
        assert!(SyntheticConfig { split_fractions: (0.5, 0.5, 0.5), ..small() }.validate().is_err());
    }
}
