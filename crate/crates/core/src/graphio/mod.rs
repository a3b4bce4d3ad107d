//! Edge-list loading, CSR construction and URAM-budgeted partitioning.

mod csr;
mod partition;
mod rmat;

pub use csr::{build_csr, CsrGraph};
pub use partition::{partition, partition_size, partition_with_size, Partition, PartitionPlan};
pub use rmat::{rmat, RmatParams};

use std::path::Path;

use serde::Serialize;
use thiserror::Error;

pub const DEFAULT_URAM_BYTES: u64 = 4_718_592;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Edge {
    pub src: u32,
    pub dst: u32,
    pub weight: i64,
}

impl Edge {
    pub fn new(src: u32, dst: u32) -> Self {
        Edge { src, dst, weight: 1 }
    }

    pub fn weighted(src: u32, dst: u32, weight: i64) -> Self {
        Edge { src, dst, weight }
    }
}

/// A graph as read from an edge list. Edges keep file order; unweighted
/// edges carry weight 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Graph {
    pub vertex_count: usize,
    pub edges: Vec<Edge>,
    pub weighted: bool,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("{path}: {source}")]
    Io { path: String, source: IoMessage },
    #[error("line {line}: malformed id `{text}`")]
    MalformedId { line: usize, text: String },
    #[error("line {line}: malformed weight `{text}`")]
    MalformedWeight { line: usize, text: String },
    #[error("line {line}: expected {expected} columns, found {found}")]
    ColumnCount { line: usize, expected: usize, found: usize },
}

/// I/O error text, kept as a string so `GraphError` stays comparable.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{0}")]
pub struct IoMessage(pub String);

impl Graph {
    /// Builds a graph whose vertex count is one more than the largest id.
    pub fn from_edges(edges: Vec<Edge>, weighted: bool) -> Self {
        let vertex_count = edges.iter().map(|e| e.src.max(e.dst) as usize + 1).max().unwrap_or(0);
        Graph { vertex_count, edges, weighted }
    }

    pub fn unweighted(pairs: &[(u32, u32)]) -> Self {
        Graph::from_edges(pairs.iter().map(|&(s, d)| Edge::new(s, d)).collect(), false)
    }

    pub fn weighted(triples: &[(u32, u32, i64)]) -> Self {
        Graph::from_edges(triples.iter().map(|&(s, d, w)| Edge::weighted(s, d, w)).collect(), true)
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertex_count];
        for e in &self.edges {
            deg[e.src as usize] += 1;
        }
        deg
    }

    /// Renders the graph in the edge-list format accepted by [`parse_graph`].
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for e in &self.edges {
            if self.weighted {
                out.push_str(&format!("{} {} {}\n", e.src, e.dst, e.weight));
            } else {
                out.push_str(&format!("{} {}\n", e.src, e.dst));
            }
        }
        out
    }
}

/// Parses a whitespace-separated edge list with `#` comments.
pub fn parse_graph(text: &str, weighted: bool) -> Result<Graph, GraphError> {
    let expected = if weighted { 3 } else { 2 };
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let cols: Vec<&str> = content.split_whitespace().collect();
        if cols.is_empty() {
            continue;
        }
        if cols.len() != expected {
            return Err(GraphError::ColumnCount { line, expected, found: cols.len() });
        }
        let id = |t: &str| {
            t.parse::<u32>().map_err(|_| GraphError::MalformedId { line, text: t.to_string() })
        };
        let src = id(cols[0])?;
        let dst = id(cols[1])?;
        let weight = if weighted {
            cols[2].parse::<i64>().map_err(|_| GraphError::MalformedWeight { line, text: cols[2].to_string() })?
        } else {
            1
        };
        edges.push(Edge { src, dst, weight });
    }
    Ok(Graph::from_edges(edges, weighted))
}

pub fn load_graph(path: impl AsRef<Path>, weighted: bool) -> Result<Graph, GraphError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| GraphError::Io {
        path: path.display().to_string(),
        source: IoMessage(e.to_string()),
    })?;
    parse_graph(&text, weighted)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unweighted_counts() {
        let g = parse_graph("0 1\n0 2\n", false).unwrap();
        assert_eq!((g.vertex_count, g.edge_count()), (3, 2));
    }

    #[test]
    fn weighted_read() {
        let g = parse_graph("0 1 2\n0 2 3\n1 2 1\n", true).unwrap();
        assert_eq!((g.vertex_count, g.edge_count()), (3, 3));
        assert_eq!(g.edges.iter().map(|e| e.weight).collect::<Vec<_>>(), vec![2, 3, 1]);
    }

    #[test]
    fn negative_id() {
        assert_eq!(
            parse_graph("0 -1\n", false),
            Err(GraphError::MalformedId { line: 1, text: "-1".into() })
        );
    }

    #[test]
    fn weight_column_rules() {
        assert!(matches!(parse_graph("0 1\n", true), Err(GraphError::ColumnCount { expected: 3, found: 2, .. })));
        assert!(matches!(parse_graph("0 1 5\n", false), Err(GraphError::ColumnCount { expected: 2, found: 3, .. })));
        assert!(matches!(parse_graph("0 1 x\n", true), Err(GraphError::MalformedWeight { .. })));
    }

    #[test]
    fn comments_and_blank_lines() {
        let g = parse_graph("# header\n\n0 1 # trailing\n  2 0\n", false).unwrap();
        assert_eq!(g.edges, vec![Edge::new(0, 1), Edge::new(2, 0)]);
        assert_eq!(g.vertex_count, 3);
    }

    #[test]
    fn empty_file() {
        let g = parse_graph("", false).unwrap();
        assert_eq!((g.vertex_count, g.edge_count()), (0, 0));
    }

    #[test]
    fn edge_list_round_trip() {
        let g = Graph::weighted(&[(0, 1, 2), (3, 3, 7)]);
        assert_eq!(parse_graph(&g.to_edge_list(), true).unwrap(), g);
    }

    #[test]
    fn missing_file() {
        assert!(matches!(load_graph("/nonexistent/graph.txt", false), Err(GraphError::Io { .. })));
    }
}
