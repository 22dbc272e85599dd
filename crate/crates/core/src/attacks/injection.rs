use super::{attacked_count, check_rate, Result};
use crate::graph::{top_k_by_degree, Dataset, Graph, NodeSpec};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    /// Each feature uniform on `[alpha, beta]`.
    UniformRange,
    /// Each feature `alpha` or `beta` with probability 1/2.
    UniformBinary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeInjectionConfig {
    /// Injected nodes as a fraction of the original node count.
    pub rate: f64,
    pub feature_mode: FeatureMode,
    /// Whether injected nodes join the training set.
    pub into_train: bool,
}

impl NodeInjectionConfig {
    pub fn new(rate: f64, feature_mode: FeatureMode) -> Self {
        Self { rate, feature_mode, into_train: true }
    }
}

/// Everything the attacker knows besides the structure: shapes and the public
/// feature domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InjectionDomain {
    pub d: usize,
    pub num_classes: usize,
    pub alpha: f64,
    pub beta: f64,
}

/// Crafts `ceil(rate · n)` random nodes; node `j` attaches to the `j`-th
/// highest-degree node (cycling if there are more injections than nodes).
pub fn plan_injection<R: Rng + ?Sized>(
    graph: &Graph,
    domain: &InjectionDomain,
    config: &NodeInjectionConfig,
    rng: &mut R,
) -> Result<Vec<NodeSpec>> {
    check_rate(config.rate)?;
    let n = graph.num_nodes();
    let count = attacked_count(config.rate, n);
    let anchors = top_k_by_degree(graph, count.min(n))?;
    Ok((0..count)
        .map(|j| {
            let features = (0..domain.d)
                .map(|_| match config.feature_mode {
                    FeatureMode::UniformRange => rng.gen_range(domain.alpha..=domain.beta),
                    FeatureMode::UniformBinary => {
                        if rng.gen_bool(0.5) {
                            domain.beta
                        } else {
                            domain.alpha
                        }
                    }
                })
                .collect();
            let label = rng.gen_range(0..domain.num_classes);
            NodeSpec { features, label, neighbors: vec![anchors[j % anchors.len()]] }
        })
        .collect())
}

/// Injects nodes planned by [`plan_injection`], which sees only the graph and
/// the public domain.
pub fn inject_nodes<R: Rng + ?Sized>(dataset: &Dataset, config: &NodeInjectionConfig, rng: &mut R) -> Result<Dataset> {
    let domain = InjectionDomain {
        d: dataset.feature_dim(),
        num_classes: dataset.num_classes(),
        alpha: dataset.alpha(),
        beta: dataset.beta(),
    };
    let specs = plan_injection(dataset.graph(), &domain, config, rng)?;
    Ok(dataset.add_nodes_with_edges(&specs, config.into_train)?)
}
