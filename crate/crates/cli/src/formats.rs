//! File formats.
//!
//! * Graph JSON: `{"vertices": n, "edges": [[u, v], [u, v, w], ...]}`; a
//!   missing weight means 1.
//! * Matrix CSV: one row per line, comma-separated; blank lines and lines
//!   starting with `#` are skipped. Matrix JSON: `{"rows": [[...], ...]}`.
//! * Table JSON: `{"format", "kind", "normalizer", "entries": [{"outcome",
//!   "probability"}]}` with entries in ascending outcome order.
//! * Samples JSONL: one outcome (a JSON array of integers) per line.
//! * Reports JSONL: one verification report object per line.

use std::path::Path;

use gbsamp_core::oracle::DistributionTable;
use gbsamp_core::verify::VerificationReport;
use gbsamp_core::{Graph, Matrix};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const TABLE_FORMAT: &str = "gbsamp-table/1";
pub const FORMAT_VERSIONS: &str = "table/1 samples/1 reports/1 manifest/1";

#[derive(Debug, Clone, PartialEq, Deserialize)]
struct GraphFile {
    vertices: usize,
    edges: Vec<Vec<f64>>,
}

pub fn parse_graph(text: &str) -> Result<Graph, String> {
    let file: GraphFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let mut g = Graph::new(file.vertices);
    for e in &file.edges {
        let index = |x: f64| -> Result<usize, String> {
            if x >= 0.0 && x.fract() == 0.0 {
                Ok(x as usize)
            } else {
                Err(format!("vertex index {x} is not a non-negative integer"))
            }
        };
        let (u, v, w) = match e.as_slice() {
            [u, v] => (index(*u)?, index(*v)?, 1.0),
            [u, v, w] => (index(*u)?, index(*v)?, *w),
            _ => return Err(format!("edge {e:?} must be [u, v] or [u, v, weight]")),
        };
        g.add_edge(u, v, w).map_err(|e| e.to_string())?;
    }
    Ok(g)
}

pub fn emit_graph(g: &Graph) -> String {
    let edges: Vec<serde_json::Value> = g
        .edges()
        .iter()
        .map(|e| {
            if e.weight == 1.0 {
                serde_json::json!([e.u, e.v])
            } else {
                serde_json::json!([e.u, e.v, e.weight])
            }
        })
        .collect();
    serde_json::json!({"vertices": g.vertex_count(), "edges": edges}).to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct MatrixFile {
    rows: Vec<Vec<f64>>,
}

pub fn parse_matrix_csv(text: &str) -> Result<Matrix, String> {
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|e| format!("line {}: {x:?}: {e}", n + 1))
            })
            .collect::<Result<Vec<f64>, String>>()?;
        rows.push(row);
    }
    Matrix::from_rows(&rows).map_err(|e| e.to_string())
}

pub fn parse_matrix_json(text: &str) -> Result<Matrix, String> {
    let file: MatrixFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
    Matrix::from_rows(&file.rows).map_err(|e| e.to_string())
}

pub fn emit_matrix_csv(a: &Matrix) -> String {
    let mut out = String::new();
    for i in 0..a.rows() {
        let row: Vec<String> = a.row(i).iter().map(|x| x.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn read_graph(path: &Path) -> CliResult<Graph> {
    parse_graph(&read(path)?).map_err(|m| CliError::format(path, m))
}

/// CSV unless the file name ends in `.json`.
pub fn read_matrix(path: &Path) -> CliResult<Matrix> {
    let text = read(path)?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        parse_matrix_json(&text)
    } else {
        parse_matrix_csv(&text)
    };
    parsed.map_err(|m| CliError::format(path, m))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TableEntry {
    outcome: Vec<usize>,
    probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TableFile {
    format: String,
    kind: String,
    normalizer: Option<f64>,
    entries: Vec<TableEntry>,
}

pub fn emit_table(kind: &str, t: &DistributionTable) -> String {
    let file = TableFile {
        format: TABLE_FORMAT.into(),
        kind: kind.into(),
        normalizer: t.normalizer(),
        entries: t
            .iter()
            .map(|(k, p)| TableEntry {
                outcome: k.clone(),
                probability: p,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("table serializes");
    s.push('\n');
    s
}

/// The table and its kind.
pub fn parse_table(text: &str) -> Result<(String, DistributionTable), String> {
    let file: TableFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if file.format != TABLE_FORMAT {
        return Err(format!("unsupported table format {:?}", file.format));
    }
    let entries = file
        .entries
        .into_iter()
        .map(|e| (e.outcome, e.probability))
        .collect();
    Ok((
        file.kind,
        DistributionTable::from_probabilities(entries, file.normalizer),
    ))
}

pub fn emit_sample_line(outcome: &[usize], out: &mut String) {
    out.push('[');
    for (i, x) in outcome.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&x.to_string());
    }
    out.push_str("]\n");
}

pub fn parse_samples(text: &str) -> Result<Vec<Vec<usize>>, String> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(n, l)| serde_json::from_str(l).map_err(|e| format!("line {}: {e}", n + 1)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportLine {
    pub check_name: String,
    pub corpus_item: String,
    pub claimed_bound: f64,
    pub observed: f64,
    pub passed: bool,
    pub samples_used: u64,
}

impl From<&VerificationReport> for ReportLine {
    fn from(r: &VerificationReport) -> Self {
        Self {
            check_name: r.check_name.clone(),
            corpus_item: r.corpus_item.clone(),
            claimed_bound: r.claimed_bound,
            observed: r.observed,
            passed: r.passed,
            samples_used: r.samples_used,
        }
    }
}

pub fn emit_report_line(r: &VerificationReport, out: &mut String) {
    // Infinite ratios have no JSON form; they serialize as null.
    out.push_str(&serde_json::to_string(&ReportLine::from(r)).expect("report serializes"));
    out.push('\n');
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn graph_examples() {
        let g = parse_graph(r#"{"vertices": 3, "edges": [[0, 1], [1, 2, 0.5]]}"#).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.edge(1).weight, 0.5);
        assert_eq!(
            emit_graph(&g),
            r#"{"edges":[[0,1],[1,2,0.5]],"vertices":3}"#
        );
        assert!(parse_graph(r#"{"vertices": 2, "edges": [[0, 0]]}"#).is_err());
        assert!(parse_graph(r#"{"vertices": 2, "edges": [[0, 1.5]]}"#).is_err());
    }

    #[test]
    fn matrix_examples() {
        let a = parse_matrix_csv("# a comment\n1, 2\n\n0.5,3\n").unwrap();
        assert_eq!(a.to_rows(), vec![vec![1.0, 2.0], vec![0.5, 3.0]]);
        assert_eq!(emit_matrix_csv(&a), "1,2\n0.5,3\n");
        assert!(parse_matrix_csv("1,2\n3\n").is_err());
        let b = parse_matrix_json(r#"{"rows": [[1, 2], [0.5, 3]]}"#).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn table_round_trip() {
        let t = DistributionTable::from_weights([(vec![], 1.0), (vec![0, 1], 3.0)]).unwrap();
        let text = emit_table("gbs", &t);
        let (kind, back) = parse_table(&text).unwrap();
        assert_eq!(kind, "gbs");
        assert_eq!(back, t);
        assert_eq!(emit_table("gbs", &back), text);
    }

    fn small_graph() -> impl Strategy<Value = Graph> {
        (1usize..7).prop_flat_map(|n| {
            let pairs: Vec<(usize, usize)> = (0..n)
                .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
                .collect();
            let len = pairs.len();
            (
                Just(n),
                Just(pairs),
                proptest::collection::vec(proptest::option::of(0.01f64..100.0), len),
            )
                .prop_map(|(n, pairs, weights)| {
                    let mut g = Graph::new(n);
                    for ((u, v), w) in pairs.into_iter().zip(weights) {
                        if let Some(w) = w {
                            g.add_edge(u, v, w).unwrap();
                        }
                    }
                    g
                })
        })
    }

    proptest! {
        #[test]
        fn graphs_round_trip(g in small_graph()) {
            let text = emit_graph(&g);
            let back = parse_graph(&text).unwrap();
            prop_assert_eq!(&back, &g);
            prop_assert_eq!(emit_graph(&back), text);
        }

        #[test]
        fn matrices_round_trip(rows in 1usize..5, cols in 1usize..5, seed in proptest::collection::vec(0.0f64..1e6, 16)) {
            let a = Matrix::from_fn(rows, cols, |i, j| seed[i * 4 + j]);
            let text = emit_matrix_csv(&a);
            let back = parse_matrix_csv(&text).unwrap();
            prop_assert_eq!(&back, &a);
            prop_assert_eq!(emit_matrix_csv(&back), text);
        }

        #[test]
        fn samples_round_trip(samples in proptest::collection::vec(proptest::collection::vec(0usize..1000, 0..8), 1..20)) {
            let mut text = String::new();
            for s in &samples {
                emit_sample_line(s, &mut text);
            }
            prop_assert_eq!(parse_samples(&text).unwrap(), samples);
        }
    }
}
