use super::run::{Metrics, ResultRow};
use super::{HarnessError, Result};
use std::fmt;

/// Column order of every CSV the harness writes.
pub const CSV_HEADER: [&str; 18] = [
    "dataset",
    "arch",
    "eps_x",
    "eps_y",
    "m",
    "k_x",
    "k_y",
    "attack",
    "attack_param",
    "defense",
    "seed",
    "repeat",
    "test_accuracy",
    "cosine",
    "mean_fd",
    "success_rate",
    "num_inferences",
    "wall_time_s",
];

/// Columns that identify an experiment; `report` groups on them.
const KEY_COLUMNS: usize = 10;
const METRIC_COLUMNS: std::ops::Range<usize> = 12..17;

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn record(row: &ResultRow) -> Vec<String> {
    let c = &row.config;
    let eps = |e: f64| if c.private { e.to_string() } else { "inf".to_string() };
    let (mut acc, mut cos, mut fd, mut rate, mut inf) = (None, None, None, None, None);
    match row.metrics {
        Metrics::Accuracy { test_accuracy } => acc = Some(test_accuracy),
        Metrics::Inference { cosine, mean_fd, .. } => (cos, fd) = (Some(cosine), Some(mean_fd)),
        Metrics::Poison { success_rate, num_inferences, .. } => (rate, inf) = (success_rate, Some(num_inferences)),
    }
    vec![
        c.dataset.label(),
        c.architecture.to_string(),
        eps(c.eps_x),
        eps(c.eps_y),
        c.m.to_string(),
        c.k_x.to_string(),
        c.k_y.to_string(),
        c.attack.name().to_string(),
        opt(c.attack.param()),
        c.defense_enabled.to_string(),
        c.seed.to_string(),
        row.repeat.to_string(),
        opt(acc),
        opt(cos),
        opt(fd),
        opt(rate),
        opt(inf),
        format!("{:.6}", row.wall_time_s),
    ]
}

/// Renders rows under [`CSV_HEADER`]; absent metrics are empty fields.
pub fn to_csv(rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(record(row))?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is built from strings"))
}

/// Mean and sample standard deviation of one metric within one group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    /// Zero for a single value.
    pub std: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Self { count: values.len(), mean, std })
    }
}

/// Rows sharing every key column.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportGroup {
    /// Values of the first ten CSV columns.
    pub key: Vec<String>,
    pub runs: usize,
    /// One entry per metric column, `None` where the group has no values.
    pub metrics: Vec<Option<Summary>>,
}

/// Per-config aggregates of a harness CSV, in order of first appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub groups: Vec<ReportGroup>,
}

impl Report {
    pub fn group(&self, key_prefix: &[&str]) -> Option<&ReportGroup> {
        self.groups.iter().find(|g| g.key.iter().zip(key_prefix).all(|(a, b)| a == b))
    }
}

/// Groups a harness CSV by configuration and summarizes each metric.
pub fn summarize_csv(csv_text: &str) -> Result<Report> {
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(HarnessError::Config(format!("unexpected CSV header {header:?}")));
    }
    let mut groups: Vec<(Vec<String>, usize, Vec<Vec<f64>>)> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let key: Vec<String> = rec.iter().take(KEY_COLUMNS).map(str::to_string).collect();
        let idx = match groups.iter().position(|g| g.0 == key) {
            Some(idx) => idx,
            None => {
                groups.push((key, 0, vec![Vec::new(); METRIC_COLUMNS.len()]));
                groups.len() - 1
            }
        };
        let g = &mut groups[idx];
        g.1 += 1;
        for (slot, col) in METRIC_COLUMNS.enumerate() {
            let field = &rec[col];
            if field.is_empty() {
                continue;
            }
            let v: f64 = field.parse().map_err(|_| {
                HarnessError::Config(format!("row {}: column {} holds {field:?}, not a number", i + 2, CSV_HEADER[col]))
            })?;
            g.2[slot].push(v);
        }
    }
    Ok(Report {
        groups: groups
            .into_iter()
            .map(|(key, runs, values)| ReportGroup { key, runs, metrics: values.iter().map(|v| Summary::of(v)).collect() })
            .collect(),
    })
}

impl fmt::Display for Report {
    /// A plain aligned table; metric columns absent from every group are dropped.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let shown: Vec<usize> =
            (0..METRIC_COLUMNS.len()).filter(|&m| self.groups.iter().any(|g| g.metrics[m].is_some())).collect();
        let mut table: Vec<Vec<String>> = Vec::new();
        let mut head: Vec<String> = CSV_HEADER[..KEY_COLUMNS].iter().map(|s| s.to_string()).collect();
        head.push("runs".into());
        head.extend(shown.iter().map(|&m| CSV_HEADER[METRIC_COLUMNS.start + m].to_string()));
        table.push(head);
        for g in &self.groups {
            let mut line = g.key.clone();
            line.push(g.runs.to_string());
            for &m in &shown {
                line.push(g.metrics[m].map_or(String::new(), |s| format!("{:.4} ± {:.4}", s.mean, s.std)));
            }
            table.push(line);
        }
        let widths: Vec<usize> =
            (0..table[0].len()).map(|c| table.iter().map(|l| l[c].chars().count()).max().unwrap_or(0)).collect();
        for line in &table {
            let cells: Vec<String> =
                line.iter().zip(&widths).map(|(cell, w)| format!("{cell:<w$}", w = *w)).collect();
            writeln!(f, "{}", cells.join("  ").trim_end())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{AttackSpec, ExperimentConfig};

    fn row(attack: AttackSpec, repeat: usize, metrics: Metrics) -> ResultRow {
        ResultRow { config: ExperimentConfig { attack, ..Default::default() }, repeat, metrics, detections: 0, wall_time_s: 0.5 }
    }

    #[test]
    fn absent_metrics_are_empty_fields() {
        let csv = to_csv(&[
            row(AttackSpec::None, 0, Metrics::Accuracy { test_accuracy: 0.75 }),
            row(
                AttackSpec::Poison { fraction: 0.1 },
                0,
                Metrics::Poison { success_rate: None, num_inferences: 0, num_targets: 3, exact_verdicts: 0 },
            ),
        ])
        .unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert!(lines[1].ends_with(",0,0,0.75,,,,,0.500000"), "{}", lines[1]);
        assert!(lines[2].contains(",poison,0.1,false,0,0,,,,,0,"), "{}", lines[2]);
    }

    #[test]
    fn non_private_budgets_print_as_inf() {
        let mut r = row(AttackSpec::None, 0, Metrics::Accuracy { test_accuracy: 1.0 });
        r.config.private = false;
        let csv = to_csv(&[r]).unwrap();
        assert!(csv.lines().nth(1).unwrap().contains(",inf,inf,"));
    }

    #[test]
    fn report_matches_hand_statistics() {
        let rows: Vec<ResultRow> = [0.5, 0.7, 0.9]
            .iter()
            .enumerate()
            .map(|(i, &a)| row(AttackSpec::Flip { rate: 0.1 }, i, Metrics::Accuracy { test_accuracy: a }))
            .chain(std::iter::once(row(AttackSpec::None, 0, Metrics::Accuracy { test_accuracy: 0.8 })))
            .collect();
        let report = summarize_csv(&to_csv(&rows).unwrap()).unwrap();
        assert_eq!(report.groups.len(), 2);
        let flip = &report.groups[0];
        assert_eq!(flip.runs, 3);
        let s = flip.metrics[0].unwrap();
        assert!((s.mean - 0.7).abs() < 1e-12);
        assert!((s.std - 0.2).abs() < 1e-12);
        assert!(flip.metrics[1].is_none());
        assert_eq!(report.groups[1].metrics[0].unwrap().std, 0.0);
        let text = report.to_string();
        assert!(text.contains("0.7000 ± 0.2000"), "{text}");
        assert!(!text.contains("success_rate"));
    }

    #[test]
    fn report_rejects_foreign_csv() {
        assert!(summarize_csv("a,b\n1,2\n").is_err());
        let mut bad = to_csv(&[row(AttackSpec::None, 0, Metrics::Accuracy { test_accuracy: 0.5 })]).unwrap();
        bad = bad.replace(",0.5,", ",x,");
        assert!(summarize_csv(&bad).is_err());
    }
}
