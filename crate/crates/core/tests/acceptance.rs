//! Acceptance run: one PASS/FAIL line per criterion.
mod common;

use std::cell::Cell;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use graphitron::archsim::{simulate, SimConfig, SimStats};
use graphitron::codegen::KernelPlan;
use graphitron::graphio::{partition, partition_size, rmat, Graph, RmatParams};
use graphitron::interp::{run, vector_names, Value};
use graphitron::passes::PassOptions;
use graphitron::programs;
use graphitron::sema::{render_mir, MirProgram};

type Outcome = Result<String, String>;

fn criterion(n: u32, title: &str, budget: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Err(format!("panicked: {msg}"))
    });
    let took = start.elapsed();
    let outcome = match (outcome, budget) {
        (Ok(detail), Some(b)) if took > b => Err(format!("{detail}; took {took:.2?}, budget {b:?}")),
        (o, _) => o,
    };
    let (tag, detail) = match &outcome {
        Ok(d) => ("PASS", d),
        Err(d) => ("FAIL", d),
    };
    println!("{tag} {n} {title} ({took:.2?}): {detail}");
    outcome.is_ok()
}

fn fit(g: &Graph, weighted: bool) -> Graph {
    let mut g = g.clone();
    g.weighted = weighted;
    if !weighted {
        for e in &mut g.edges {
            e.weight = 1;
        }
    }
    g
}

fn compiled(lanes: u32) -> Vec<(&'static str, MirProgram, KernelPlan)> {
    programs::ALL
        .iter()
        .map(|(name, src)| {
            let (mir, plan) = common::compile(src, PassOptions::all(lanes), lanes);
            (*name, mir, plan)
        })
        .collect()
}

fn check_programs() -> Outcome {
    let mut kernels = 0;
    for (name, _) in programs::ALL {
        let path = format!("{}/programs/{name}.gt", env!("CARGO_MANIFEST_DIR"));
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = graphitron::cli::run(["graphitron", "check", path.as_str()], &mut out, &mut err);
        if code != 0 || !err.is_empty() {
            return Err(format!("{name}: exit {code}, {}", String::from_utf8_lossy(&err)));
        }
        let text = String::from_utf8_lossy(&out);
        kernels += text
            .rsplit_once('(')
            .and_then(|(_, t)| t.split_whitespace().next())
            .and_then(|n| n.parse::<usize>().ok())
            .ok_or(format!("{name}: unexpected output {text}"))?;
    }
    Ok(format!("6 programs, {kernels} kernels, no diagnostics"))
}

fn describe_corpus(corpus: &[common::CorpusGraph]) -> Outcome {
    let self_loops = corpus.iter().filter(|c| c.weighted.edges.iter().any(|e| e.src == e.dst)).count();
    let disconnected = corpus.iter().filter(|c| common::bfs_levels(&undirected(&c.weighted), 0).contains(&-1)).count();
    let within = corpus.iter().all(|c| c.weighted.vertex_count <= 200 && c.weighted.edges.len() <= 2000);
    if corpus.len() < 52 || self_loops == 0 || disconnected == 0 || !within {
        return Err(format!("corpus shape: {} graphs, {self_loops} with self-loops, {disconnected} disconnected", corpus.len()));
    }
    Ok(format!("{} graphs ({self_loops} with self-loops, {disconnected} disconnected)", corpus.len()))
}

fn undirected(g: &Graph) -> Graph {
    let mut edges = g.edges.clone();
    edges.extend(g.edges.iter().map(|e| graphitron::graphio::Edge::weighted(e.dst, e.src, e.weight)));
    let mut u = Graph::from_edges(edges, true);
    u.vertex_count = g.vertex_count;
    u
}

fn oracle_equivalence(corpus: &[common::CorpusGraph]) -> Outcome {
    let shape = describe_corpus(corpus)?;
    let programs = compiled(4);
    for c in corpus {
        for (name, mir, _) in &programs {
            let g = c.for_program(mir.graph.weighted);
            let result = run(mir, g, &common::args()).map_err(|e| format!("{name} on {}: {e}", c.name))?;
            common::check_against_oracle(name, g, &result.store).map_err(|e| format!("{name} on {}: {e}", c.name))?;
        }
    }
    Ok(format!("6 programs x {shape} agree with the oracles"))
}

fn pass_preservation(corpus: &[common::CorpusGraph]) -> Outcome {
    let mut configs = vec![PassOptions::none(), PassOptions { decouple: true, legalize: None }];
    configs.extend([1, 2, 4, 8].map(PassOptions::all));
    let mut compared = 0;
    for (name, src) in programs::ALL {
        let mirs: Vec<MirProgram> = configs.iter().map(|&o| common::compile(src, o, 4).0).collect();
        let names = vector_names(&mirs[0]);
        for c in corpus {
            let g = c.for_program(mirs[0].graph.weighted);
            let base = run(&mirs[0], g, &common::args()).map_err(|e| e.to_string())?;
            for (mir, opts) in mirs.iter().zip(&configs).skip(1) {
                let got = run(mir, g, &common::args()).map_err(|e| e.to_string())?;
                base.store.matches(&got.store, &names, 1e-9).map_err(|e| format!("{name} {opts:?} on {}: {e}", c.name))?;
                compared += 1;
            }
        }
    }
    let (mir, _) = common::compile(programs::SSSP, PassOptions { decouple: true, legalize: None }, 4);
    let text = render_mir(&mir);
    let func = |name: &str| -> String {
        let head = format!("\nfunc {name} ");
        text.find(&head).map(|i| text[i + 1..].split("\nend").next().unwrap_or("").to_string()).unwrap_or_default()
    };
    let copy = func("sssp0");
    let relax = func("sssp1");
    let kernels: Vec<&str> = mir.schedule.iter().map(|inv| mir.functions[inv.function].name.as_str()).collect();
    let ok = body_lines(&copy) == ["tmp[v] = SP[v];"]
        && copy.contains("(v: Vertex)")
        && body_lines(&relax) == ["SP[dst] min= tmp[src] + weight;"]
        && kernels.windows(2).any(|w| w == ["sssp0", "sssp1"])
        && !kernels.contains(&"sssp");
    if !ok {
        return Err(format!("decoupled sssp does not have the copy/min-reduce shape:\n{copy}\n{relax}"));
    }
    Ok(format!("{compared} comparisons identical; sssp decouples into copy + min-reduce kernels"))
}

fn body_lines(f: &str) -> Vec<&str> {
    f.lines().filter(|l| l.starts_with("    ")).map(str::trim).collect()
}

fn store_bits_equal(a: &graphitron::interp::PropertyStore, b: &graphitron::interp::PropertyStore, names: &[&str]) -> bool {
    names.iter().all(|n| {
        let (x, y) = (a.property(n).unwrap(), b.property(n).unwrap());
        x.len() == y.len() && x.iter().zip(y).all(|(p, q)| format!("{p:?}") == format!("{q:?}"))
    })
}

fn simulator_equivalence(corpus: &[common::CorpusGraph], violations: &Cell<u64>, steps: &Cell<u64>) -> Outcome {
    let mut sims = 0;
    let mut worst_float = 0.0f64;
    for lanes in [1u32, 4] {
        for (name, mir, plan) in compiled(lanes) {
            let names = vector_names(&mir);
            for c in corpus {
                let g = c.for_program(mir.graph.weighted);
                let want = run(&mir, g, &common::args()).map_err(|e| e.to_string())?;
                for cache in [None, Some(16usize), Some(1024)] {
                    for burst in [8usize, 64] {
                        let cfg = SimConfig {
                            lanes,
                            cache_enabled: cache.is_some(),
                            cache_lines: cache.unwrap_or(1024),
                            burst_length: burst,
                            ..SimConfig::default()
                        };
                        let where_ = || format!("{name} on {} lanes {lanes} cache {cache:?} burst {burst}", c.name);
                        let runs: Vec<_> = (0..3)
                            .map(|_| simulate(&plan, &mir, g, &cfg, &common::args()))
                            .collect::<Result<_, _>>()
                            .map_err(|e| format!("{}: {e}", where_()))?;
                        want.store.matches(&runs[0].result.store, &names, 1e-9).map_err(|e| format!("{}: {e}", where_()))?;
                        for n in &names {
                            let a = want.store.property(n).unwrap();
                            let b = runs[0].result.store.property(n).unwrap();
                            for (x, y) in a.iter().zip(b) {
                                if let (Value::Float(x), Value::Float(y)) = (*x, *y) {
                                    worst_float = worst_float.max((x - y).abs() / x.abs().max(y.abs()).max(f64::MIN_POSITIVE));
                                }
                            }
                        }
                        for r in &runs[1..] {
                            if r.stats != runs[0].stats || !store_bits_equal(&r.result.store, &runs[0].result.store, &names) {
                                return Err(format!("{}: repeated runs differ", where_()));
                            }
                        }
                        violations.set(violations.get() + runs[0].stats.totals.bank_violations);
                        steps.set(steps.get() + runs[0].stats.totals.shuffle_routings);
                        sims += 3;
                    }
                }
            }
        }
    }
    Ok(format!(
        "{sims} simulations; ints exact, largest float relative difference {worst_float:.1e} (bound 1e-9); counters repeat exactly"
    ))
}

fn kernel_stats<'a>(stats: &'a SimStats, name: &str) -> &'a graphitron::archsim::KernelStats {
    stats.kernel(name).unwrap_or_else(|| panic!("no stats for {name}"))
}

fn optimization_effects(corpus: &[common::CorpusGraph], violations: &Cell<u64>, steps: &Cell<u64>) -> Outcome {
    let mut notes = Vec::new();
    let skewed = rmat(1000, 8000, RmatParams::default(), 7);
    let (mir, plan) = common::compile(programs::PAGERANK, PassOptions::all(4), 4);
    let sim = |cfg: SimConfig| simulate(&plan, &mir, &skewed, &cfg, &common::args()).map_err(|e| e.to_string());
    let cached = sim(SimConfig::default())?;
    let uncached = sim(SimConfig { cache_enabled: false, ..SimConfig::default() })?;
    let exact = sim(SimConfig { line_size: 1, prefetch: false, cache_lines: 4096, ..SimConfig::default() })?;
    let with = kernel_stats(&cached.stats, "Scatter").random_words;
    let without = kernel_stats(&uncached.stats, "Scatter").random_words;
    let reduction = 1.0 - with as f64 / without as f64;
    let e = kernel_stats(&exact.stats, "Scatter");
    let ratio = e.cache_misses as f64 / (e.cache_hits + e.cache_misses) as f64;
    let a_ok = reduction >= 0.30 && ratio < 0.7;
    notes.push(format!(
        "(a) Scatter random words {without} -> {with} ({:.1}% fewer), distinct/accesses {ratio:.3}",
        reduction * 100.0
    ));

    let (bfs_mir, bfs_plan) = common::compile(programs::BFS, PassOptions::all(4), 4);
    let (hyb_mir, hyb_plan) = common::compile(programs::HYBRID_BFS, PassOptions::all(4), 4);
    let mut graphs: Vec<(String, Graph)> = corpus.iter().map(|c| (c.name.clone(), c.unweighted.clone())).collect();
    graphs.push(("rmat1000".into(), fit(&skewed, false)));
    for seed in 0..8 {
        graphs.push((format!("rmat{seed}"), fit(&rmat(2000, 6000, RmatParams::default(), 100 + seed), false)));
    }
    let (mut with_vcp, mut b_bad) = (0, Vec::new());
    for (name, g) in &graphs {
        let cfg = SimConfig::default();
        let bfs = simulate(&bfs_plan, &bfs_mir, g, &cfg, &common::args()).map_err(|e| e.to_string())?;
        let hyb = simulate(&hyb_plan, &hyb_mir, g, &cfg, &common::args()).map_err(|e| e.to_string())?;
        violations.set(violations.get() + bfs.stats.totals.bank_violations + hyb.stats.totals.bank_violations);
        steps.set(steps.get() + bfs.stats.totals.shuffle_routings + hyb.stats.totals.shuffle_routings);
        let vcp_sweeps = hyb.stats.kernel("VertexTraversal").map_or(0, |k| k.invocations);
        if vcp_sweeps > 0 {
            with_vcp += 1;
            let (h, b) = (hyb.stats.totals.edges_examined, bfs.stats.totals.edges_examined);
            if h >= b {
                b_bad.push(format!("{name}: hybrid {h} vs bfs {b}"));
            }
        }
    }
    let b_ok = b_bad.is_empty() && with_vcp > 0;
    notes.push(format!(
        "(b) {with_vcp}/{} graphs ran a vertex-centric sweep, hybrid examined fewer edges on {}",
        graphs.len(),
        with_vcp - b_bad.len()
    ));
    if !b_bad.is_empty() {
        notes.push(format!("not fewer on {}", b_bad.join(", ")));
    }

    violations.set(violations.get() + cached.stats.totals.bank_violations + uncached.stats.totals.bank_violations);
    steps.set(steps.get() + cached.stats.totals.shuffle_routings + uncached.stats.totals.shuffle_routings);
    let c_ok = violations.get() == 0;
    notes.push(format!("(c) {} bank violations over {} routed updates", violations.get(), steps.get()));
    let detail = notes.join("; ");
    if a_ok && b_ok && c_ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn partitioning() -> Outcome {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x7061_7274);
    for i in 0..1000u64 {
        let g = common::random_graph(0x5eed_0000 + i, i % 4);
        let uram: u64 = rng.gen_range(1..=4096);
        let bpv: u64 = rng.gen_range(1..=16);
        let plan = partition(&g, uram, bpv);
        let u = ((uram / bpv) as usize).max(1);
        if plan.size != u || partition_size(uram, bpv) != u {
            return Err(format!("graph {i}: U = {} for uram {uram}, bpv {bpv}", plan.size));
        }
        let mut seen = vec![false; g.edges.len()];
        for (p, part) in plan.partitions.iter().enumerate() {
            if part.start != p * u {
                return Err(format!("graph {i}: partition {p} starts at {}", part.start));
            }
            let mut prev = None;
            for &id in &part.edge_ids {
                let e = g.edges[id];
                if !(part.start..part.end).contains(&(e.dst as usize)) {
                    return Err(format!("graph {i}: edge {id} outside partition {p}"));
                }
                if prev.is_some_and(|q| q > e.src) {
                    return Err(format!("graph {i}: partition {p} not sorted by source"));
                }
                prev = Some(e.src);
                if std::mem::replace(&mut seen[id], true) {
                    return Err(format!("graph {i}: edge {id} in two partitions"));
                }
            }
        }
        if !seen.iter().all(|&s| s) {
            return Err(format!("graph {i}: an edge is in no partition"));
        }
    }
    Ok("1000 graphs: disjoint cover, source-sorted, destination ranges, U = floor(uram / bytes per vertex)".into())
}

fn codegen_goldens() -> Outcome {
    let mut kernels = 0;
    for (name, _) in programs::ALL {
        let bad = common::golden_mismatches(name);
        if !bad.is_empty() {
            return Err(format!("{name}: {bad:?}"));
        }
        kernels += common::manifest_cross_check(name).map_err(|e| format!("{name}: {e}"))?;
    }
    Ok(format!("6 golden trees equal; {kernels} kernels pass the manifest cross-check"))
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let matrix = common::exit_code_matrix(dir.path());
    let rows = matrix.len();
    for (what, argv, env, want) in matrix {
        let argv: Vec<&str> = argv.iter().map(String::as_str).collect();
        let env: Vec<(&str, &str)> = env.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
        let a = common::cli(&argv, &env);
        let b = common::cli(&argv, &env);
        if a.code != want {
            return Err(format!("{what}: exit {} (want {want}): {}", a.code, a.stderr));
        }
        if (a.code, &a.stdout, &a.stderr) != (b.code, &b.stdout, &b.stderr) {
            return Err(format!("{what}: repeated invocation differs"));
        }
    }
    let stats = dir.path().join("stats.json");
    let stats = stats.to_str().unwrap();
    let cases: [&[&str]; 5] = [
        &["run", "programs/ppr.gt", "--json", "--", "programs/graphs/g1.txt"],
        &["sim", "programs/cgaw.gt", "--json", "--stats", stats, "--", "programs/graphs/g2.txt"],
        &["sim", "programs/hybrid_bfs.gt", "--print", "old_level", "--", "programs/graphs/cycle.txt"],
        &["dump-mir", "programs/pagerank.gt", "--json"],
        &["dump-plan", "programs/sssp.gt"],
    ];
    for argv in cases {
        let a = common::cli(argv, &[]);
        let sa = std::fs::read(stats).ok();
        let b = common::cli(argv, &[]);
        let sb = std::fs::read(stats).ok();
        if a.code != 0 || (a.stdout, a.stderr, sa) != (b.stdout, b.stderr, sb) {
            return Err(format!("{argv:?} not repeatable"));
        }
    }
    Ok(format!("{rows} exit-code cases honored; {} commands byte-identical across runs", cases.len() + rows))
}

fn main() {
    let corpus = common::corpus();
    let violations = Cell::new(0);
    let steps = Cell::new(0);
    let secs = Duration::from_secs;
    let results = [
        criterion(1, "compilation coverage", Some(secs(1)), check_programs),
        criterion(2, "oracle equivalence", Some(secs(30)), || oracle_equivalence(&corpus)),
        criterion(3, "pass preservation", None, || pass_preservation(&corpus)),
        criterion(4, "simulator equivalence", None, || simulator_equivalence(&corpus, &violations, &steps)),
        criterion(5, "measured optimization effects", None, || optimization_effects(&corpus, &violations, &steps)),
        criterion(6, "partitioning", Some(secs(10)), partitioning),
        criterion(7, "codegen goldens", None, codegen_goldens),
        criterion(8, "cli determinism", None, cli_determinism),
    ];
    let passed = results.iter().filter(|&&r| r).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
