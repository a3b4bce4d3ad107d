use serde::Serialize;

use super::{Edge, Graph};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    /// Destination range `[start, end)`.
    pub start: usize,
    pub end: usize,
    /// File ordinals of the partition's edges, sorted by (src, dst).
    pub edge_ids: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartitionPlan {
    pub size: usize,
    pub partitions: Vec<Partition>,
}

impl PartitionPlan {
    pub fn edges<'a>(&'a self, g: &'a Graph, p: usize) -> impl Iterator<Item = &'a Edge> + 'a {
        self.partitions[p].edge_ids.iter().map(move |&i| &g.edges[i])
    }

    /// Edge ordinals in processing order: partition by partition.
    pub fn edge_order(&self) -> impl Iterator<Item = usize> + '_ {
        self.partitions.iter().flat_map(|p| p.edge_ids.iter().copied())
    }
}

/// Vertices per destination range: `floor(uram_bytes / bytes_per_vertex_state)`, at least 1.
pub fn partition_size(uram_bytes: u64, bytes_per_vertex_state: u64) -> usize {
    (uram_bytes / bytes_per_vertex_state.max(1)).max(1) as usize
}

/// Splits edges into destination ranges of `partition_size(..)` vertices.
pub fn partition(g: &Graph, uram_bytes: u64, bytes_per_vertex_state: u64) -> PartitionPlan {
    partition_with_size(g, partition_size(uram_bytes, bytes_per_vertex_state))
}

pub fn partition_with_size(g: &Graph, size: usize) -> PartitionPlan {
    let size = size.max(1);
    let count = g.vertex_count.div_ceil(size).max(1);
    let mut partitions: Vec<Partition> = (0..count)
        .map(|p| Partition { start: p * size, end: ((p + 1) * size).min(g.vertex_count.max(size)), edge_ids: vec![] })
        .collect();
    for (i, e) in g.edges.iter().enumerate() {
        partitions[e.dst as usize / size].edge_ids.push(i);
    }
    for p in &mut partitions {
        p.edge_ids.sort_by_key(|&i| (g.edges[i].src, g.edges[i].dst, i));
    }
    PartitionPlan { size, partitions }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g1() -> Graph {
        Graph::unweighted(&[(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)])
    }

    fn pairs(g: &Graph, plan: &PartitionPlan, p: usize) -> Vec<(u32, u32)> {
        plan.edges(g, p).map(|e| (e.src, e.dst)).collect()
    }

    #[test]
    fn g1_with_u2() {
        let g = g1();
        let plan = partition(&g, 8, 4);
        assert_eq!(plan.size, 2);
        assert_eq!(plan.partitions.len(), 2);
        assert_eq!((plan.partitions[0].start, plan.partitions[0].end), (0, 2));
        assert_eq!((plan.partitions[1].start, plan.partitions[1].end), (2, 4));
        assert_eq!(pairs(&g, &plan, 0), vec![(0, 1)]);
        assert_eq!(pairs(&g, &plan, 1), vec![(0, 2), (1, 2), (1, 3), (2, 3)]);
    }

    #[test]
    fn single_partition_when_u_covers_graph() {
        let g = Graph::unweighted(&[(2, 0), (0, 1), (1, 0)]);
        let plan = partition_with_size(&g, 10);
        assert_eq!(plan.partitions.len(), 1);
        assert_eq!(pairs(&g, &plan, 0), vec![(0, 1), (1, 0), (2, 0)]);
    }

    #[test]
    fn size_from_budget() {
        assert_eq!(partition_size(4096, 4), 1024);
        assert_eq!(partition_size(3, 4), 1);
        assert_eq!(partition_size(4_718_592, 12), 393_216);
    }

    #[test]
    fn empty_graph() {
        let plan = partition_with_size(&Graph::unweighted(&[]), 4);
        assert_eq!(plan.partitions.len(), 1);
        assert!(plan.partitions[0].edge_ids.is_empty());
    }
}
