//! Runs every bundled program on the small example graphs with the reference interpreter.
use graphitron::graphio::load_graph;
use graphitron::interp::{self, vector_names};
use graphitron::{programs, sema};

fn main() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/programs/graphs");
    for (name, src) in programs::ALL {
        let mir = sema::compile_source(src).unwrap();
        let file = if mir.graph.weighted { "g2.txt" } else { "g1.txt" };
        let path = format!("{dir}/{file}");
        let graph = load_graph(&path, mir.graph.weighted).unwrap();
        let result = interp::run(&mir, &graph, &[path]).unwrap();
        println!("{name} on {file}");
        for prop in vector_names(&mir) {
            let values: Vec<String> = result.store.property(prop).unwrap().iter().map(|v| v.to_string()).collect();
            println!("  {prop:<12} [{}]", values.join(", "));
        }
        println!("  while iterations {:?}, {} sweeps", result.loop_iterations, result.trace.len());
    }
}
