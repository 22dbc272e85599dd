use super::{Graph, GraphError, Result};
use crate::matrix::DenseMatrix;

/// Disjoint train/validation/test node masks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Masks {
    pub train: Vec<bool>,
    pub val: Vec<bool>,
    pub test: Vec<bool>,
}

impl Masks {
    /// Builds masks over `num_nodes` nodes from id lists.
    pub fn from_ids(num_nodes: usize, train: &[usize], val: &[usize], test: &[usize]) -> Result<Self> {
        let to_mask = |ids: &[usize]| -> Result<Vec<bool>> {
            let mut mask = vec![false; num_nodes];
            for &id in ids {
                if id >= num_nodes {
                    return Err(GraphError::InvalidNode { node: id, num_nodes });
                }
                mask[id] = true;
            }
            Ok(mask)
        };
        Ok(Self { train: to_mask(train)?, val: to_mask(val)?, test: to_mask(test)? })
    }

    pub fn train_ids(&self) -> Vec<usize> {
        ids(&self.train)
    }

    pub fn val_ids(&self) -> Vec<usize> {
        ids(&self.val)
    }

    pub fn test_ids(&self) -> Vec<usize> {
        ids(&self.test)
    }

    fn len(&self) -> usize {
        self.train.len()
    }
}

fn ids(mask: &[bool]) -> Vec<usize> {
    mask.iter().enumerate().filter_map(|(i, &m)| m.then_some(i)).collect()
}

/// A node to append: its feature row, label and neighbors among existing nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    pub features: Vec<f64>,
    pub label: usize,
    pub neighbors: Vec<usize>,
}

/// Graph plus node features in `[alpha, beta]`, labels and splits.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    graph: Graph,
    features: DenseMatrix,
    labels: Vec<usize>,
    num_classes: usize,
    alpha: f64,
    beta: f64,
    masks: Masks,
}

impl Dataset {
    /// Assembles a dataset, checking every invariant.
    pub fn new(
        graph: Graph,
        features: DenseMatrix,
        labels: Vec<usize>,
        num_classes: usize,
        (alpha, beta): (f64, f64),
        masks: Masks,
    ) -> Result<Self> {
        let n = graph.num_nodes();
        if n == 0 {
            return Err(GraphError::Invalid("dataset needs at least one node".into()));
        }
        if !(alpha < beta) || !alpha.is_finite() || !beta.is_finite() {
            return Err(GraphError::Invalid(format!("feature domain [{alpha}, {beta}] is empty")));
        }
        if features.rows() != n {
            return Err(GraphError::Invalid(format!("{} feature rows for {n} nodes", features.rows())));
        }
        if labels.len() != n {
            return Err(GraphError::Invalid(format!("{} labels for {n} nodes", labels.len())));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(GraphError::Invalid(format!("label {bad} not below num_classes = {num_classes}")));
        }
        for (r, row) in features.row_iter().enumerate() {
            if let Some((c, v)) = row.iter().enumerate().find(|(_, v)| !(alpha..=beta).contains(*v)) {
                return Err(GraphError::Invalid(format!(
                    "feature ({r}, {c}) = {v} outside [{alpha}, {beta}]"
                )));
            }
        }
        if masks.len() != n || masks.val.len() != n || masks.test.len() != n {
            return Err(GraphError::Invalid("mask length differs from node count".into()));
        }
        for (name, mask) in [("train", &masks.train), ("val", &masks.val), ("test", &masks.test)] {
            if !mask.iter().any(|&m| m) {
                return Err(GraphError::Invalid(format!("{name} mask is empty")));
            }
        }
        if let Some(v) = (0..n).find(|&v| u8::from(masks.train[v]) + u8::from(masks.val[v]) + u8::from(masks.test[v]) > 1) {
            return Err(GraphError::Invalid(format!("node {v} appears in more than one split")));
        }
        Ok(Self { graph, features, labels, num_classes, alpha, beta, masks })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn features(&self) -> &DenseMatrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_nodes(&self) -> usize {
        self.graph.num_nodes()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn masks(&self) -> &Masks {
        &self.masks
    }

    /// True when every feature is exactly `alpha` or `beta`.
    pub fn is_binary(&self) -> bool {
        self.features.as_slice().iter().all(|&v| v == self.alpha || v == self.beta)
    }

    /// Same dataset with a replaced label vector (lengths and range checked).
    pub fn with_labels(&self, labels: Vec<usize>) -> Result<Self> {
        Self::new(
            self.graph.clone(),
            self.features.clone(),
            labels,
            self.num_classes,
            (self.alpha, self.beta),
            self.masks.clone(),
        )
    }

    /// Appends nodes with the given rows, labels and edges to existing nodes.
    ///
    /// New nodes join the train mask when `into_train` is set and are never in
    /// val or test.
    pub fn add_nodes_with_edges(&self, specs: &[NodeSpec], into_train: bool) -> Result<Self> {
        let n = self.num_nodes();
        let d = self.feature_dim();
        let mut features = self.features.clone();
        let mut labels = self.labels.clone();
        let mut edges = Vec::new();
        for (i, spec) in specs.iter().enumerate() {
            if spec.features.len() != d {
                return Err(GraphError::Invalid(format!(
                    "injected node {i} has {} features, expected {d}",
                    spec.features.len()
                )));
            }
            if let Some(&bad) = spec.neighbors.iter().find(|&&u| u >= n) {
                return Err(GraphError::InvalidNode { node: bad, num_nodes: n });
            }
            features.push_row(&spec.features);
            labels.push(spec.label);
            edges.extend(spec.neighbors.iter().map(|&u| (u, n + i)));
        }
        let graph = self.graph.with_additions(specs.len(), &edges)?;
        let mut masks = self.masks.clone();
        masks.train.extend(std::iter::repeat_n(into_train, specs.len()));
        masks.val.extend(std::iter::repeat_n(false, specs.len()));
        masks.test.extend(std::iter::repeat_n(false, specs.len()));
        Self::new(graph, features, labels, self.num_classes, (self.alpha, self.beta), masks)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::graph::degrees;

    /// Star with center 0; features alternate, labels by parity.
    pub(crate) fn star_dataset(leaves: usize) -> Dataset {
        let g = Graph::star(leaves);
        let n = g.num_nodes();
        let features = DenseMatrix::from_vec(n, 2, (0..n).flat_map(|i| [(i % 2) as f64, ((i + 1) % 2) as f64]).collect());
        let labels = (0..n).map(|i| i % 2).collect();
        let masks = Masks::from_ids(n, &[0, 1], &[2], &(3..n).collect::<Vec<_>>()).unwrap();
        Dataset::new(g, features, labels, 2, (0.0, 1.0), masks).unwrap()
    }

    #[test]
    fn inject_one_node_at_center() {
        let ds = star_dataset(5);
        let spec = NodeSpec { features: vec![1.0, 0.0], label: 1, neighbors: vec![0] };
        let out = ds.add_nodes_with_edges(&[spec], true).unwrap();
        assert_eq!(out.num_nodes(), 7);
        assert_eq!(out.graph().degree(0), 6);
        assert!(out.masks().train[6] && !out.masks().val[6] && !out.masks().test[6]);
        let excluded = ds
            .add_nodes_with_edges(&[NodeSpec { features: vec![0.0, 0.0], label: 0, neighbors: vec![0] }], false)
            .unwrap();
        assert!(!excluded.masks().train[6]);
    }

    #[test]
    fn inject_nothing_is_identity() {
        let ds = star_dataset(4);
        assert_eq!(ds.add_nodes_with_edges(&[], true).unwrap(), ds);
    }

    #[test]
    fn inject_two_into_path() {
        let g = Graph::path(3);
        let masks = Masks::from_ids(3, &[0], &[1], &[2]).unwrap();
        let ds = Dataset::new(g, DenseMatrix::zeros(3, 1), vec![0, 0, 0], 1, (0.0, 1.0), masks).unwrap();
        let spec = NodeSpec { features: vec![0.5], label: 0, neighbors: vec![1] };
        let out = ds.add_nodes_with_edges(&[spec.clone(), spec], true).unwrap();
        // recount from the edge list
        let mut recount = vec![0; out.num_nodes()];
        for (u, v) in out.graph().edges() {
            recount[u] += 1;
            recount[v] += 1;
        }
        assert_eq!(recount, degrees(out.graph()));
        assert_eq!(recount[1], 4);
    }

    #[test]
    fn injection_errors() {
        let ds = star_dataset(3);
        let bad_nb = NodeSpec { features: vec![0.0, 0.0], label: 0, neighbors: vec![4] };
        assert!(matches!(ds.add_nodes_with_edges(&[bad_nb], true), Err(GraphError::InvalidNode { .. })));
        let bad_len = NodeSpec { features: vec![0.0], label: 0, neighbors: vec![0] };
        assert!(ds.add_nodes_with_edges(&[bad_len], true).is_err());
    }

    #[test]
    fn invariants_rejected() {
        let g = Graph::path(3);
        let masks = Masks::from_ids(3, &[0], &[1], &[2]).unwrap();
        let f = DenseMatrix::zeros(3, 1);
        assert!(Dataset::new(g.clone(), f.clone(), vec![0, 2, 0], 2, (0.0, 1.0), masks.clone()).is_err());
        assert!(Dataset::new(g.clone(), DenseMatrix::filled(3, 1, 2.0), vec![0; 3], 2, (0.0, 1.0), masks.clone()).is_err());
        let overlapping = Masks::from_ids(3, &[0, 1], &[1], &[2]).unwrap();
        assert!(Dataset::new(g.clone(), f.clone(), vec![0; 3], 2, (0.0, 1.0), overlapping).is_err());
        let empty_val = Masks::from_ids(3, &[0], &[], &[2]).unwrap();
        assert!(Dataset::new(g, f, vec![0; 3], 2, (0.0, 1.0), empty_val).is_err());
    }
}
