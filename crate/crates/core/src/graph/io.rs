//! Directory format:
//!
//! | file           | contents                                              |
//! |----------------|-------------------------------------------------------|
//! | `meta.json`    | `{num_nodes, d, num_classes, alpha, beta}`            |
//! | `edges.csv`    | header `u,v`, one undirected edge per row, `u < v`    |
//! | `features.csv` | no header, `num_nodes` rows of `d` decimals           |
//! | `labels.csv`   | no header, one class id per row                       |
//! | `splits.json`  | `{train: [ids], val: [ids], test: [ids]}`             |

use super::{Dataset, Graph, GraphError, Masks, Result};
use crate::matrix::DenseMatrix;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

#[derive(Debug, Serialize, Deserialize)]
struct Meta {
    num_nodes: usize,
    d: usize,
    num_classes: usize,
    alpha: f64,
    beta: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct Splits {
    train: Vec<usize>,
    val: Vec<usize>,
    test: Vec<usize>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| GraphError::Io { path: path.to_owned(), source })
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| GraphError::Io { path: path.to_owned(), source })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|source| GraphError::Json { path: path.to_owned(), source })?;
    write(path, &text)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    serde_json::from_str(&read(path)?).map_err(|source| GraphError::Json { path: path.to_owned(), source })
}

fn malformed(path: &Path, line: usize, message: impl Into<String>) -> GraphError {
    GraphError::Malformed { path: path.to_owned(), line, message: message.into() }
}

/// Non-blank lines with their 1-based line numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty())
}

fn parse_field<T: std::str::FromStr>(path: &Path, line: usize, field: &str, what: &str) -> Result<T> {
    field.trim().parse().map_err(|_| malformed(path, line, format!("cannot parse {what} from {field:?}")))
}

/// Reads a dataset directory, validating every value against `meta.json`.
pub fn load_dataset(dir: impl AsRef<Path>) -> Result<Dataset> {
    let dir = dir.as_ref();
    let meta_path = dir.join("meta.json");
    let meta: Meta = read_json(&meta_path)?;
    if !(meta.alpha < meta.beta) {
        return Err(malformed(&meta_path, 1, format!("alpha {} must be below beta {}", meta.alpha, meta.beta)));
    }

    let edges_path = dir.join("edges.csv");
    let text = read(&edges_path)?;
    let mut rows = lines(&text);
    match rows.next() {
        Some((_, header)) if header.replace(' ', "") == "u,v" => {}
        Some((line, header)) => return Err(malformed(&edges_path, line, format!("expected header `u,v`, found {header:?}"))),
        None => return Err(malformed(&edges_path, 1, "missing header `u,v`")),
    }
    let mut edges = Vec::new();
    for (line, row) in rows {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 2 {
            return Err(malformed(&edges_path, line, format!("expected 2 fields, found {}", fields.len())));
        }
        let u: usize = parse_field(&edges_path, line, fields[0], "node id")?;
        let v: usize = parse_field(&edges_path, line, fields[1], "node id")?;
        if u >= meta.num_nodes || v >= meta.num_nodes {
            return Err(malformed(&edges_path, line, format!("node id out of range for {} nodes", meta.num_nodes)));
        }
        if u == v {
            return Err(malformed(&edges_path, line, format!("self-loop on node {u}")));
        }
        edges.push((u, v));
    }
    let graph = Graph::from_edges(meta.num_nodes, edges)?;

    let features_path = dir.join("features.csv");
    let text = read(&features_path)?;
    let mut data = Vec::with_capacity(meta.num_nodes * meta.d);
    let mut count = 0;
    for (line, row) in lines(&text) {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != meta.d {
            return Err(malformed(&features_path, line, format!("expected {} values, found {}", meta.d, fields.len())));
        }
        for (column, field) in fields.into_iter().enumerate() {
            let value: f64 = parse_field(&features_path, line, field, "feature")?;
            if !(meta.alpha..=meta.beta).contains(&value) {
                return Err(GraphError::OutOfDomain {
                    path: features_path,
                    line,
                    column,
                    value,
                    alpha: meta.alpha,
                    beta: meta.beta,
                });
            }
            data.push(value);
        }
        count += 1;
    }
    if count != meta.num_nodes {
        return Err(malformed(&features_path, count, format!("{count} rows for {} nodes", meta.num_nodes)));
    }
    let features = DenseMatrix::from_vec(meta.num_nodes, meta.d, data);

    let labels_path = dir.join("labels.csv");
    let text = read(&labels_path)?;
    let mut labels = Vec::with_capacity(meta.num_nodes);
    for (line, row) in lines(&text) {
        let label: usize = parse_field(&labels_path, line, row, "label")?;
        if label >= meta.num_classes {
            return Err(GraphError::LabelOutOfRange { path: labels_path, line, label, num_classes: meta.num_classes });
        }
        labels.push(label);
    }
    if labels.len() != meta.num_nodes {
        return Err(malformed(&labels_path, labels.len(), format!("{} labels for {} nodes", labels.len(), meta.num_nodes)));
    }

    let splits: Splits = read_json(&dir.join("splits.json"))?;
    let masks = Masks::from_ids(meta.num_nodes, &splits.train, &splits.val, &splits.test)?;
    Dataset::new(graph, features, labels, meta.num_classes, (meta.alpha, meta.beta), masks)
}

/// Writes `dataset` into `dir`, creating the directory if needed.
pub fn save_dataset(dataset: &Dataset, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|source| GraphError::Io { path: dir.to_owned(), source })?;

    let meta = Meta {
        num_nodes: dataset.num_nodes(),
        d: dataset.feature_dim(),
        num_classes: dataset.num_classes(),
        alpha: dataset.alpha(),
        beta: dataset.beta(),
    };
    write_json(&dir.join("meta.json"), &meta)?;

    let mut edges = String::from("u,v\n");
    for (u, v) in dataset.graph().edges() {
        let _ = writeln!(edges, "{u},{v}");
    }
    write(&dir.join("edges.csv"), &edges)?;

    // `{}` on f64 prints the shortest representation that parses back exactly
    let mut features = String::new();
    for row in dataset.features().row_iter() {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                features.push(',');
            }
            let _ = write!(features, "{v}");
        }
        features.push('\n');
    }
    write(&dir.join("features.csv"), &features)?;

    let mut labels = String::new();
    for l in dataset.labels() {
        let _ = writeln!(labels, "{l}");
    }
    write(&dir.join("labels.csv"), &labels)?;

    let masks = dataset.masks();
    let splits = Splits { train: masks.train_ids(), val: masks.val_ids(), test: masks.test_ids() };
    write_json(&dir.join("splits.json"), &splits)
}
