//! Emits device kernels, host driver and manifest for a bundled program.
//!
//!     cargo run --example emit_code -- hybrid_bfs /tmp/hybrid_bfs
use graphitron::codegen::{emit, plan_kernels};
use graphitron::passes::{run_passes, PassOptions};
use graphitron::{programs, sema};

fn main() {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "bfs".to_string());
    let src = programs::get(&name).unwrap_or_else(|| panic!("no bundled program `{name}`"));
    let mir = sema::compile_source(src).unwrap();
    let (mir, _) = run_passes(mir, PassOptions::all(4)).unwrap();
    let plan = plan_kernels(&mir, 4, sema::DEFAULT_CHANNELS);
    let art = emit(&name, &plan, &mir);

    for k in &art.manifest.kernels {
        println!("{:<16} {:<14} {:<10} {}", k.name, k.model, k.stream, k.chain.join(" -> "));
    }
    match args.next() {
        Some(dir) => {
            for path in art.write_to(std::path::Path::new(&dir)).unwrap() {
                println!("wrote {}", path.display());
            }
        }
        None => println!("\n{}", art.host),
    }
}
