use super::{GnnError, Result};
use crate::graph::Graph;
use crate::matrix::DenseMatrix;

/// Square sparse matrix in CSR form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    offsets: Vec<usize>,
    columns: Vec<usize>,
    values: Vec<f64>,
}

impl SparseOperator {
    fn from_rows(rows: impl Iterator<Item = Vec<(usize, f64)>>) -> Self {
        let mut offsets = vec![0];
        let mut columns = Vec::new();
        let mut values = Vec::new();
        for row in rows {
            for (c, v) in row {
                columns.push(c);
                values.push(v);
            }
            offsets.push(columns.len());
        }
        Self { offsets, columns, values }
    }

    pub fn dim(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Nonzero `(column, value)` pairs of `row`.
    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[row]..self.offsets[row + 1];
        self.columns[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    /// Dense copy, for tests and small graphs.
    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.dim();
        let mut out = DenseMatrix::zeros(n, n);
        for r in 0..n {
            for (c, v) in self.row(r) {
                out[(r, c)] += v;
            }
        }
        out
    }

    /// `self · x`
    pub fn apply(&self, x: &DenseMatrix) -> DenseMatrix {
        assert_eq!(x.rows(), self.dim(), "operator/matrix shape mismatch");
        let mut out = DenseMatrix::zeros(x.rows(), x.cols());
        for r in 0..self.dim() {
            let out_row = out.row_mut(r);
            for (c, v) in self.row(r) {
                for (o, &xv) in out_row.iter_mut().zip(x.row(c)) {
                    *o += v * xv;
                }
            }
        }
        out
    }

    /// `selfᵀ · x`
    pub fn apply_transpose(&self, x: &DenseMatrix) -> DenseMatrix {
        assert_eq!(x.rows(), self.dim(), "operator/matrix shape mismatch");
        let mut out = DenseMatrix::zeros(x.rows(), x.cols());
        for r in 0..self.dim() {
            for (c, v) in self.row(r) {
                let out_row = out.row_mut(c);
                for (o, &xv) in out_row.iter_mut().zip(x.row(r)) {
                    *o += v * xv;
                }
            }
        }
        out
    }
}

/// Node `v` followed by its neighbors; the sorted order of `Graph` keeps the
/// reduction order fixed.
fn closed_neighborhood(graph: &Graph, v: usize) -> impl Iterator<Item = usize> + '_ {
    std::iter::once(v).chain(graph.neighbors(v).iter().copied())
}

/// `D̂^{-1/2} (A + I) D̂^{-1/2}` with `D̂` the degree matrix of `A + I`.
pub fn normalize_adjacency(graph: &Graph) -> SparseOperator {
    let inv_sqrt: Vec<f64> = (0..graph.num_nodes()).map(|v| 1.0 / ((graph.degree(v) + 1) as f64).sqrt()).collect();
    SparseOperator::from_rows(
        (0..graph.num_nodes()).map(|v| closed_neighborhood(graph, v).map(|u| (u, inv_sqrt[v] * inv_sqrt[u])).collect()),
    )
}

/// Row-stochastic `D̂^{-1} (A + I)`: the mean over each closed neighborhood.
pub fn mean_operator(graph: &Graph) -> SparseOperator {
    SparseOperator::from_rows((0..graph.num_nodes()).map(|v| {
        let w = 1.0 / (graph.degree(v) + 1) as f64;
        closed_neighborhood(graph, v).map(|u| (u, w)).collect()
    }))
}

/// `D^{-1} A`: the mean over open neighborhoods; isolated nodes get a zero row.
pub fn neighbor_mean_operator(graph: &Graph) -> SparseOperator {
    SparseOperator::from_rows((0..graph.num_nodes()).map(|v| {
        let deg = graph.degree(v);
        graph.neighbors(v).iter().map(|&u| (u, 1.0 / deg as f64)).collect()
    }))
}

/// `k` rounds of closed-neighborhood mean aggregation. `k = 0` is the identity.
pub fn kprop(features: &DenseMatrix, graph: &Graph, k: usize) -> Result<DenseMatrix> {
    if features.rows() != graph.num_nodes() {
        return Err(GnnError::Shape(format!("{} feature rows for {} nodes", features.rows(), graph.num_nodes())));
    }
    let op = mean_operator(graph);
    let mut x = features.clone();
    for _ in 0..k {
        x = op.apply(&x);
    }
    Ok(x)
}

/// Pseudo-labels from `k_y` rounds of propagating one-hot noisy labels;
/// every node's label is known.
pub fn drop_pseudo_labels(noisy_labels: &[usize], graph: &Graph, k_y: usize, num_classes: usize) -> Result<Vec<usize>> {
    drop_pseudo_labels_masked(noisy_labels, &vec![true; noisy_labels.len()], graph, k_y, num_classes)
}

/// Like [`drop_pseudo_labels`], but only nodes with `known[v]` contribute a
/// one-hot row; the rest start at zero. Ties go to the smallest class id. A
/// node whose propagated row is all zero keeps its noisy label.
pub fn drop_pseudo_labels_masked(
    noisy_labels: &[usize],
    known: &[bool],
    graph: &Graph,
    k_y: usize,
    num_classes: usize,
) -> Result<Vec<usize>> {
    let n = graph.num_nodes();
    if noisy_labels.len() != n || known.len() != n {
        return Err(GnnError::Shape(format!("label vectors must cover {n} nodes")));
    }
    if let Some(&bad) = noisy_labels.iter().find(|&&l| l >= num_classes) {
        return Err(GnnError::Shape(format!("label {bad} not below num_classes = {num_classes}")));
    }
    let mut onehot = DenseMatrix::zeros(n, num_classes);
    for (v, (&label, &k)) in noisy_labels.iter().zip(known).enumerate() {
        if k {
            onehot[(v, label)] = 1.0;
        }
    }
    let scores = kprop(&onehot, graph, k_y)?;
    Ok(scores
        .argmax_rows()
        .into_iter()
        .enumerate()
        .map(|(v, best)| if scores.row(v).iter().all(|&s| s == 0.0) { noisy_labels[v] } else { best })
        .collect())
}
