use serde::Serialize;

use super::Graph;

/// Compressed sparse row adjacency. `edge_ids[k]` is the file ordinal of the
/// edge stored at column `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CsrGraph {
    pub offsets: Vec<usize>,
    pub columns: Vec<u32>,
    pub weights: Option<Vec<i64>>,
    pub edge_ids: Vec<usize>,
}

impl CsrGraph {
    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.columns[self.offsets[v]..self.offsets[v + 1]]
    }
}

/// Builds CSR with each neighbor list sorted by destination, ties by file order.
pub fn build_csr(g: &Graph) -> CsrGraph {
    let n = g.vertex_count;
    let mut offsets = vec![0usize; n + 1];
    for e in &g.edges {
        offsets[e.src as usize + 1] += 1;
    }
    for v in 0..n {
        offsets[v + 1] += offsets[v];
    }
    let mut order: Vec<usize> = (0..g.edges.len()).collect();
    order.sort_by_key(|&i| (g.edges[i].src, g.edges[i].dst, i));
    let columns = order.iter().map(|&i| g.edges[i].dst).collect();
    let weights = g.weighted.then(|| order.iter().map(|&i| g.edges[i].weight).collect());
    CsrGraph { offsets, columns, weights, edge_ids: order }
}
