use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Dropped, Graph};
use crate::error::{Error, Result};

/// What the loader discarded.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    pub self_loops: usize,
    pub duplicates: usize,
}

fn is_comment(line: &str) -> bool {
    line.is_empty() || line.starts_with('#') || line.starts_with('%')
}

/// Parse a whitespace-separated edge list. Labels are mapped to dense
/// indices in first-appearance order; columns after the first two are
/// ignored. Nodes missing from `weights` get weight 1.
pub fn load_edge_list<R: BufRead>(
    reader: R,
    directed: bool,
    weights: Option<&HashMap<String, f64>>,
) -> Result<(Graph, LoadReport)> {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut labels: Vec<String> = Vec::new();
    let mut edges = Vec::new();
    let mut intern = |label: &str| -> usize {
        if let Some(&i) = index.get(label) {
            return i;
        }
        let i = labels.len();
        index.insert(label.to_string(), i);
        labels.push(label.to_string());
        i
    };
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if is_comment(line) {
            continue;
        }
        let mut tokens = line.split_whitespace();
        match (tokens.next(), tokens.next()) {
            (Some(u), Some(v)) => {
                let u = intern(u);
                let v = intern(v);
                edges.push((u, v));
            }
            _ => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("expected two node labels, found {line:?}"),
                })
            }
        }
    }
    let (graph, Dropped { self_loops, duplicates }) =
        Graph::from_edges_lossy(labels.len(), directed, &edges)?;
    let w = match weights {
        Some(table) => labels.iter().map(|l| table.get(l).copied().unwrap_or(1.0)).collect(),
        None => vec![1.0; labels.len()],
    };
    let graph = graph.with_weights(w)?.with_labels(labels)?;
    Ok((graph, LoadReport { self_loops, duplicates }))
}

pub fn load_edge_list_path(
    path: &Path,
    directed: bool,
    weights: Option<&HashMap<String, f64>>,
) -> Result<(Graph, LoadReport)> {
    let file = std::fs::File::open(path)?;
    load_edge_list(std::io::BufReader::new(file), directed, weights)
}

/// Parse a `label weight` table.
pub fn load_weight_table<R: BufRead>(reader: R) -> Result<HashMap<String, f64>> {
    let mut table = HashMap::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if is_comment(line) {
            continue;
        }
        let bad = |message: String| Error::Parse { line: lineno + 1, message };
        let mut tokens = line.split_whitespace();
        let (Some(label), Some(w)) = (tokens.next(), tokens.next()) else {
            return Err(bad(format!("expected `label weight`, found {line:?}")));
        };
        let w: f64 = w.parse().map_err(|e| bad(format!("bad weight {w:?}: {e}")))?;
        table.insert(label.to_string(), w);
    }
    Ok(table)
}

/// JSON interchange form of a graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphDoc {
    pub directed: bool,
    pub labels: Vec<String>,
    pub edges: Vec<[usize; 2]>,
    pub weights: Vec<f64>,
}

impl From<&Graph> for GraphDoc {
    fn from(g: &Graph) -> Self {
        GraphDoc {
            directed: g.is_directed(),
            labels: g.labels().to_vec(),
            edges: g.edges().into_iter().map(|(u, v)| [u, v]).collect(),
            weights: g.weights().to_vec(),
        }
    }
}

impl TryFrom<GraphDoc> for Graph {
    type Error = Error;

    fn try_from(doc: GraphDoc) -> Result<Graph> {
        let edges: Vec<_> = doc.edges.iter().map(|&[u, v]| (u, v)).collect();
        Graph::from_edges(doc.labels.len(), doc.directed, &edges)?
            .with_weights(doc.weights)?
            .with_labels(doc.labels)
    }
}

impl Graph {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&GraphDoc::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Graph> {
        let doc: GraphDoc = serde_json::from_str(text)?;
        Graph::try_from(doc)
    }

    /// Edge-list text using node labels.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (u, v) in self.edges() {
            out.push_str(&self.labels()[u]);
            out.push(' ');
            out.push_str(&self.labels()[v]);
            out.push('\n');
        }
        out
    }
}
