//! Builds the CSR view of a graph and splits its edges into destination ranges.
use graphitron::graphio::{build_csr, partition, Graph};

fn main() {
    let g = Graph::unweighted(&[(0, 1), (0, 2), (1, 2), (1, 3), (2, 3), (3, 0), (4, 1), (4, 3)]);
    let csr = build_csr(&g);
    println!("offsets {:?}", csr.offsets);
    println!("columns {:?}", csr.columns);
    for v in 0..g.vertex_count {
        println!("  {v} -> {:?}", csr.neighbors(v));
    }

    // 8 bytes of URAM at 4 bytes per vertex: two destinations per partition.
    let plan = partition(&g, 8, 4);
    println!("\nU = {}", plan.size);
    for (p, part) in plan.partitions.iter().enumerate() {
        let edges: Vec<String> = plan.edges(&g, p).map(|e| format!("{}->{}", e.src, e.dst)).collect();
        println!("  dst [{}, {}): {}", part.start, part.end, edges.join(" "));
    }
}
