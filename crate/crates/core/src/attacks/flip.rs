use super::{attacked_count, check_rate, AttackError, Result};
use crate::graph::{top_k_by_degree, Dataset, Graph};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Label flipping on the `ceil(rate · n)` highest-degree nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelFlipConfig {
    pub rate: f64,
}

/// The nodes [`flip_labels`] will relabel.
pub fn flip_targets(graph: &Graph, config: &LabelFlipConfig) -> Result<Vec<usize>> {
    check_rate(config.rate)?;
    let n = graph.num_nodes();
    Ok(top_k_by_degree(graph, attacked_count(config.rate, n).min(n))?)
}

/// Replaces each targeted label with a uniformly chosen different class.
/// Runs on raw labels, before any privatization.
pub fn flip_labels<R: Rng + ?Sized>(dataset: &Dataset, config: &LabelFlipConfig, rng: &mut R) -> Result<Dataset> {
    let c = dataset.num_classes();
    if c < 2 {
        return Err(AttackError::InvalidConfig(format!("label flipping needs >= 2 classes, got {c}")));
    }
    let mut labels = dataset.labels().to_vec();
    for v in flip_targets(dataset.graph(), config)? {
        let other = rng.gen_range(0..c - 1);
        labels[v] = if other >= labels[v] { other + 1 } else { other };
    }
    Ok(dataset.with_labels(labels)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_synthetic, Masks, SyntheticConfig};
    use crate::matrix::DenseMatrix;
    use crate::rng;

    #[test]
    fn full_rate_binary_inverts_everything() {
        let cfg = SyntheticConfig { num_nodes: 50, num_classes: 2, d: 4, ..Default::default() };
        let ds = generate_synthetic(&cfg, 2).unwrap();
        let out = flip_labels(&ds, &LabelFlipConfig { rate: 1.0 }, &mut rng::stream(0, "t", &[])).unwrap();
        for (a, b) in ds.labels().iter().zip(out.labels()) {
            assert_eq!(*b, 1 - a);
        }
    }

    #[test]
    fn one_node_on_a_star_is_the_center() {
        let g = Graph::star(6);
        let masks = Masks::from_ids(7, &[0], &[1], &[2]).unwrap();
        let ds = Dataset::new(g, DenseMatrix::zeros(7, 1), vec![1; 7], 3, (0.0, 1.0), masks).unwrap();
        let out = flip_labels(&ds, &LabelFlipConfig { rate: 0.1 }, &mut rng::stream(0, "t", &[])).unwrap();
        assert_ne!(out.labels()[0], 1);
        assert!(out.labels()[1..].iter().all(|&l| l == 1));
    }

    #[test]
    fn flips_exactly_the_top_degree_set() {
        let cfg = SyntheticConfig { num_nodes: 200, num_classes: 5, d: 5, ..Default::default() };
        let ds = generate_synthetic(&cfg, 8).unwrap();
        for (seed, rate) in [(0u64, 0.01), (1, 0.1), (2, 0.37), (3, 0.5)] {
            let conf = LabelFlipConfig { rate };
            let out = flip_labels(&ds, &conf, &mut rng::stream(seed, "t", &[])).unwrap();
            let targets = flip_targets(ds.graph(), &conf).unwrap();
            // exhaustive check over every node
            let changed: Vec<usize> = (0..200).filter(|&v| out.labels()[v] != ds.labels()[v]).collect();
            let mut sorted = targets.clone();
            sorted.sort_unstable();
            assert_eq!(changed, sorted);
            assert_eq!(changed.len(), (rate * 200.0_f64).ceil() as usize);
        }
    }

    #[test]
    fn needs_two_classes() {
        let masks = Masks::from_ids(3, &[0], &[1], &[2]).unwrap();
        let ds = Dataset::new(Graph::path(3), DenseMatrix::zeros(3, 1), vec![0; 3], 1, (0.0, 1.0), masks).unwrap();
        assert!(flip_labels(&ds, &LabelFlipConfig { rate: 0.5 }, &mut rng::stream(0, "t", &[])).is_err());
    }
}
