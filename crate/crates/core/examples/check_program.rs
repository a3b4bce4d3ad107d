//! Compiles a program and prints its MIR, or the diagnostics if it has errors.
//!
//!     cargo run --example check_program -- programs/bfs.gt
use graphitron::{programs, sema};

fn main() {
    let path = std::env::args().nth(1);
    let (file, source) = match &path {
        Some(p) => (p.clone(), std::fs::read_to_string(p).expect("readable source")),
        None => ("bfs.gt".to_string(), programs::BFS.to_string()),
    };
    match sema::compile_source(&source) {
        Ok(mir) => print!("{}", sema::render_mir(&mir)),
        Err(d) => {
            eprintln!("{}", d.render(&file));
            std::process::exit(1);
        }
    }

    // A mistake is reported with its position.
    let broken = programs::BFS.replace("old_level[v] = new_level[v];", "old_level[v] = newlevel[v];");
    if let Err(d) = sema::compile_source(&broken) {
        println!("\n{}", d.render("broken.gt"));
    }
}
