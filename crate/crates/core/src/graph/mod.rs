//! Graph and dataset containers, degree utilities, on-disk format and the
//! planted-partition generator.

mod dataset;
mod io;
mod synthetic;

pub use dataset::{Dataset, Masks, NodeSpec};
pub use io::{load_dataset, save_dataset};
pub use synthetic::{generate_synthetic, SyntheticConfig};

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: invalid JSON: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}:{line}: {message}")]
    Malformed { path: PathBuf, line: usize, message: String },
    #[error("{path}:{line}: feature {column} = {value} outside declared domain [{alpha}, {beta}]")]
    OutOfDomain {
        path: PathBuf,
        line: usize,
        column: usize,
        value: f64,
        alpha: f64,
        beta: f64,
    },
    #[error("{path}:{line}: label {label} not below num_classes = {num_classes}")]
    LabelOutOfRange { path: PathBuf, line: usize, label: usize, num_classes: usize },
    #[error("node id {node} out of range for {num_nodes} nodes")]
    InvalidNode { node: usize, num_nodes: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("requested {k} nodes from a graph with {num_nodes}")]
    TooMany { k: usize, num_nodes: usize },
    #[error("invalid dataset: {0}")]
    Invalid(String),
    #[error("invalid synthetic config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, GraphError>;

/// Undirected simple graph in compressed sparse row form.
///
/// Neighbor lists are strictly increasing, symmetric and free of self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
}

impl Graph {
    /// A graph with `num_nodes` nodes and no edges.
    pub fn empty(num_nodes: usize) -> Self {
        Self { offsets: vec![0; num_nodes + 1], neighbors: Vec::new() }
    }

    /// Builds a graph from undirected edges. Duplicates and reversed copies
    /// collapse to one edge; self-loops and out-of-range ids are rejected.
    pub fn from_edges<I>(num_nodes: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); num_nodes];
        for (u, v) in edges {
            for node in [u, v] {
                if node >= num_nodes {
                    return Err(GraphError::InvalidNode { node, num_nodes });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        Ok(Self::from_adjacency(adj))
    }

    fn from_adjacency(mut adj: Vec<Vec<usize>>) -> Self {
        let mut offsets = Vec::with_capacity(adj.len() + 1);
        offsets.push(0);
        let mut neighbors = Vec::new();
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
            neighbors.extend_from_slice(list);
            offsets.push(neighbors.len());
        }
        Self { offsets, neighbors }
    }

    pub fn path(num_nodes: usize) -> Self {
        Self::from_edges(num_nodes, (1..num_nodes).map(|v| (v - 1, v))).expect("path edges are valid")
    }

    pub fn cycle(num_nodes: usize) -> Self {
        assert!(num_nodes >= 3, "a simple cycle needs at least 3 nodes");
        Self::from_edges(num_nodes, (0..num_nodes).map(|v| (v, (v + 1) % num_nodes)))
            .expect("cycle edges are valid")
    }

    /// Node 0 joined to `leaves` further nodes.
    pub fn star(leaves: usize) -> Self {
        Self::from_edges(leaves + 1, (1..=leaves).map(|v| (0, v))).expect("star edges are valid")
    }

    pub fn complete(num_nodes: usize) -> Self {
        let adj = (0..num_nodes)
            .map(|u| (0..num_nodes).filter(|&v| v != u).collect())
            .collect();
        Self::from_adjacency(adj)
    }

    pub fn num_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.neighbors[self.offsets[node]..self.offsets[node + 1]]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.offsets[node + 1] - self.offsets[node]
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.num_nodes())
            .flat_map(move |u| self.neighbors(u).iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Copy of this graph with extra nodes and edges.
    pub fn with_additions(&self, extra_nodes: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let n = self.num_nodes() + extra_nodes;
        Self::from_edges(n, self.edges().chain(edges.iter().copied()))
    }

    /// Re-checks the structural invariants.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_nodes();
        for u in 0..n {
            let list = self.neighbors(u);
            for (i, &v) in list.iter().enumerate() {
                if v >= n {
                    return Err(GraphError::InvalidNode { node: v, num_nodes: n });
                }
                if v == u {
                    return Err(GraphError::SelfLoop(u));
                }
                if i > 0 && list[i - 1] >= v {
                    return Err(GraphError::Invalid(format!("neighbor list of {u} not strictly increasing")));
                }
                if self.neighbors(v).binary_search(&u).is_err() {
                    return Err(GraphError::Invalid(format!("edge {u}-{v} is not symmetric")));
                }
            }
        }
        Ok(())
    }
}

/// `degrees[v] = |neighbors(v)|`
pub fn degrees(graph: &Graph) -> Vec<usize> {
    (0..graph.num_nodes()).map(|v| graph.degree(v)).collect()
}

/// The `k` highest-degree nodes, ties broken by ascending node id.
pub fn top_k_by_degree(graph: &Graph, k: usize) -> Result<Vec<usize>> {
    let n = graph.num_nodes();
    if k > n {
        return Err(GraphError::TooMany { k, num_nodes: n });
    }
    let mut ids: Vec<usize> = (0..n).collect();
    ids.sort_by_key(|&v| (std::cmp::Reverse(graph.degree(v)), v));
    ids.truncate(k);
    Ok(ids)
}
