//! Shows what decoupling and lane legalization do to SSSP.
use graphitron::passes::{run_passes, PassOptions};
use graphitron::{programs, sema};

fn main() {
    let mir = sema::compile_source(programs::SSSP).unwrap();
    let (plain, _) = run_passes(mir.clone(), PassOptions::none()).unwrap();
    let (opt, reports) = run_passes(mir, PassOptions::all(4)).unwrap();

    for r in &reports {
        println!(
            "{:<10} kernels rewritten {}, temporaries {}, reductions {}",
            r.pass, r.kernels_rewritten, r.temporaries_introduced, r.reductions_recognized
        );
    }
    println!("\n--- without passes\n{}", sema::render_mir(&plain));
    println!("--- decoupled and legalized for 4 lanes\n{}", sema::render_mir(&opt));
}
