//! Simulates PageRank on a skewed graph with and without the source-property cache.
use graphitron::archsim::{report, simulate, ReportFormat, SimConfig};
use graphitron::codegen::plan_kernels;
use graphitron::graphio::{rmat, RmatParams};
use graphitron::interp;
use graphitron::passes::{run_passes, PassOptions};
use graphitron::{programs, sema};

fn main() {
    let graph = rmat(1000, 8000, RmatParams::default(), 7);
    let mir = sema::compile_source(programs::PAGERANK).unwrap();
    let (mir, _) = run_passes(mir, PassOptions::all(4)).unwrap();
    let plan = plan_kernels(&mir, 4, sema::DEFAULT_CHANNELS);
    let args = vec!["rmat.txt".to_string()];

    let cached = simulate(&plan, &mir, &graph, &SimConfig::default(), &args).unwrap();
    let uncached = SimConfig { cache_enabled: false, ..SimConfig::default() };
    let uncached = simulate(&plan, &mir, &graph, &uncached, &args).unwrap();

    println!("with cache\n{}", report(&cached.stats, ReportFormat::Table));
    println!("without cache\n{}", report(&uncached.stats, ReportFormat::Table));

    let reference = interp::run(&mir, &graph, &args).unwrap();
    let names = interp::vector_names(&mir);
    match reference.store.matches(&cached.result.store, &names, 1e-9) {
        Ok(()) => println!("simulated values match the interpreter"),
        Err(e) => println!("mismatch: {e}"),
    }
}
