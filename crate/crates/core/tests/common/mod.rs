//! Shared corpus, oracles and helpers for the integration tests.
#![allow(dead_code)]

use std::collections::VecDeque;

use graphitron::codegen::{plan_kernels, KernelPlan};
use graphitron::graphio::{load_graph, Edge, Graph};
use graphitron::interp::PropertyStore;
use graphitron::passes::{run_passes, PassOptions};
use graphitron::sema::{compile_source, MirProgram, DEFAULT_CHANNELS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SSSP_INF: i64 = 1_000_000_000;

pub struct CorpusGraph {
    pub name: String,
    pub unweighted: Graph,
    pub weighted: Graph,
}

impl CorpusGraph {
    pub fn for_program(&self, weighted: bool) -> &Graph {
        if weighted {
            &self.weighted
        } else {
            &self.unweighted
        }
    }

    fn from_weighted(name: String, weighted: Graph) -> Self {
        let mut unweighted = weighted.clone();
        unweighted.weighted = false;
        for e in &mut unweighted.edges {
            e.weight = 1;
        }
        CorpusGraph { name, unweighted, weighted }
    }
}

pub fn graph_file(name: &str) -> String {
    format!("{}/programs/graphs/{name}", env!("CARGO_MANIFEST_DIR"))
}

/// Random weighted graph with ids below `vertices`; the largest id always occurs.
/// Shape 1 favors self-loops, shape 2 splits the vertices into two
/// components, shape 3 leaves most vertices isolated.
pub fn random_graph(seed: u64, shape: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: u32 = rng.gen_range(2..=200);
    let mut e: usize = rng.gen_range(1..=1999);
    if shape == 3 {
        e = e.min(v as usize / 2 + 1);
    }
    let mut edges = Vec::with_capacity(e + 1);
    for _ in 0..e {
        let (src, dst) = match shape {
            1 if rng.gen_bool(0.25) => {
                let s = rng.gen_range(0..v);
                (s, s)
            }
            2 if v >= 4 => {
                let half = v / 2;
                if rng.gen_bool(0.5) {
                    (rng.gen_range(0..half), rng.gen_range(0..half))
                } else {
                    (rng.gen_range(half..v), rng.gen_range(half..v))
                }
            }
            _ => (rng.gen_range(0..v), rng.gen_range(0..v)),
        };
        edges.push(Edge::weighted(src, dst, rng.gen_range(1..=10)));
    }
    if !edges.iter().any(|x| x.src == v - 1 || x.dst == v - 1) {
        let other = rng.gen_range(0..v);
        edges.push(Edge::weighted(v - 1, other, rng.gen_range(1..=10)));
    }
    Graph::from_edges(edges, true)
}

/// 50 seeded random graphs followed by the two bundled example graphs.
pub fn corpus() -> Vec<CorpusGraph> {
    let mut out: Vec<CorpusGraph> = (0..50u64)
        .map(|i| CorpusGraph::from_weighted(format!("random{i:02}"), random_graph(0x6772_6170 + i, i % 4)))
        .collect();
    let g1 = load_graph(graph_file("g1.txt"), false).unwrap();
    let mut g1w = g1.clone();
    g1w.weighted = true;
    out.push(CorpusGraph { name: "g1".into(), unweighted: g1, weighted: g1w });
    out.push(CorpusGraph::from_weighted("g2".into(), load_graph(graph_file("g2.txt"), true).unwrap()));
    out
}

pub fn args() -> Vec<String> {
    vec!["graph.txt".to_string()]
}

pub fn compile(src: &str, options: PassOptions, lanes: u32) -> (MirProgram, KernelPlan) {
    let (mir, _) = run_passes(compile_source(src).unwrap(), options).unwrap();
    let plan = plan_kernels(&mir, lanes, DEFAULT_CHANNELS);
    (mir, plan)
}

pub fn ints(store: &PropertyStore, name: &str) -> Vec<i64> {
    store.property(name).unwrap().iter().map(|v| v.as_int()).collect()
}

pub fn floats(store: &PropertyStore, name: &str) -> Vec<f64> {
    store.property(name).unwrap().iter().map(|v| v.as_float()).collect()
}

fn adjacency(g: &Graph) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); g.vertex_count];
    for e in &g.edges {
        adj[e.src as usize].push(e.dst as usize);
    }
    adj
}

/// Queue-based BFS. The root has level 1; unreached vertices -1.
pub fn bfs_levels(g: &Graph, root: usize) -> Vec<i64> {
    let adj = adjacency(g);
    let mut level = vec![-1; g.vertex_count];
    let mut queue = VecDeque::new();
    if root < g.vertex_count {
        level[root] = 1;
        queue.push_back(root);
    }
    while let Some(u) = queue.pop_front() {
        for &w in &adj[u] {
            if level[w] == -1 {
                level[w] = level[u] + 1;
                queue.push_back(w);
            }
        }
    }
    level
}

/// Bellman-Ford distances from `root`; unreachable vertices keep `inf`.
pub fn bellman_ford(g: &Graph, root: usize, inf: i64) -> Vec<i64> {
    let mut dist = vec![inf; g.vertex_count];
    dist[root] = 0;
    for _ in 0..g.vertex_count {
        let mut changed = false;
        for e in &g.edges {
            let (s, d) = (e.src as usize, e.dst as usize);
            if dist[s] != inf && dist[s] + e.weight < dist[d] {
                dist[d] = dist[s] + e.weight;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    dist
}

/// Power iteration with a dense transition matrix: `x' = base + m * A x`,
/// repeated until no entry moves by `eps` or more.
fn power_iteration(g: &Graph, base: &[f64], start: Vec<f64>, m: f64, eps: f64) -> Vec<f64> {
    let n = g.vertex_count;
    let deg = g.out_degrees();
    let mut a = vec![vec![0.0f64; n]; n];
    for e in &g.edges {
        a[e.dst as usize][e.src as usize] += 1.0;
    }
    for row in a.iter_mut() {
        for (u, x) in row.iter_mut().enumerate() {
            if *x != 0.0 {
                *x /= deg[u] as f64;
            }
        }
    }
    let mut x = start;
    loop {
        let next: Vec<f64> = (0..n)
            .map(|v| base[v] + m * a[v].iter().zip(&x).map(|(w, xv)| w * xv).sum::<f64>())
            .collect();
        let moving = next.iter().zip(&x).any(|(p, q)| (p - q).abs() >= eps);
        x = next;
        if !moving {
            return x;
        }
    }
}

pub fn pagerank_dense(g: &Graph, m: f64, eps: f64) -> Vec<f64> {
    let n = g.vertex_count;
    let base = vec![(1.0 - m) / n as f64; n];
    power_iteration(g, &base, vec![1.0 / n as f64; n], m, eps)
}

pub fn ppr_dense(g: &Graph, root: usize, m: f64, eps: f64) -> Vec<f64> {
    let n = g.vertex_count;
    let mut base = vec![0.0; n];
    base[root] = 1.0 - m;
    let mut start = vec![0.0; n];
    start[root] = 1.0;
    power_iteration(g, &base, start, m, eps)
}

/// Each edge's weight over the total weight leaving its source.
pub fn cgaw_direct(g: &Graph) -> Vec<f64> {
    let mut total = vec![0i64; g.vertex_count];
    for e in &g.edges {
        total[e.src as usize] += e.weight;
    }
    g.edges.iter().map(|e| e.weight as f64 / total[e.src as usize] as f64).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(f64::MIN_POSITIVE)).fold(0.0, f64::max)
}

/// Checks a finished interpreter or simulator store against the oracle for `program`.
pub fn check_against_oracle(program: &str, g: &Graph, store: &PropertyStore) -> Result<(), String> {
    match program {
        "bfs" | "hybrid_bfs" => {
            let want = bfs_levels(g, 1);
            let got = ints(store, "old_level");
            (got == want).then_some(()).ok_or_else(|| format!("levels {got:?} != {want:?}"))
        }
        "sssp" => {
            let want = bellman_ford(g, 0, SSSP_INF);
            let got = ints(store, "SP");
            (got == want).then_some(()).ok_or_else(|| format!("distances {got:?} != {want:?}"))
        }
        "pagerank" | "ppr" => {
            let want = if program == "pagerank" { pagerank_dense(g, 0.85, 0.001) } else { ppr_dense(g, 1, 0.85, 0.001) };
            let d = max_abs_diff(&floats(store, "PR_old"), &want);
            (d <= 1e-6).then_some(()).ok_or_else(|| format!("rank differs by {d:e}"))
        }
        "cgaw" => {
            let d = max_rel_diff(&floats(store, "attention"), &cgaw_direct(g));
            (d <= 1e-9).then_some(()).ok_or_else(|| format!("attention differs by {d:e}"))
        }
        other => Err(format!("no oracle for {other}")),
    }
}

pub fn golden_dir(program: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(program)
}

pub fn emit_program(program: &str) -> graphitron::codegen::EmittedArtifact {
    let src = graphitron::programs::get(program).expect("bundled program");
    let (mir, plan) = compile(src, PassOptions::all(4), 4);
    graphitron::codegen::emit(program, &plan, &mir)
}

fn files_under(root: &std::path::Path) -> Vec<String> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        let Ok(entries) = std::fs::read_dir(&dir) else { continue };
        for entry in entries.flatten() {
            let path = entry.path();
            if path.is_dir() {
                stack.push(path);
            } else if let Ok(rel) = path.strip_prefix(root) {
                out.push(rel.to_string_lossy().replace('\\', "/"));
            }
        }
    }
    out.sort();
    out
}

/// Paths that differ between a fresh emission and the checked-in golden tree.
pub fn golden_mismatches(program: &str) -> Vec<String> {
    let art = emit_program(program);
    let dir = golden_dir(program);
    let mut bad = art.diff_against(&dir);
    let expected: Vec<String> = art.files().into_iter().map(|(p, _)| p).collect();
    for extra in files_under(&dir) {
        if !expected.contains(&extra) {
            bad.push(format!("{extra} (unexpected)"));
        }
    }
    bad
}

pub fn host_kernel_args(host: &str, kernel: &str) -> Vec<String> {
    let prefix = format!("clSetKernelArg(krnl_{kernel}, ");
    let mut seen = Vec::new();
    for line in host.lines().map(str::trim).filter(|l| l.starts_with(&prefix)) {
        let rest = &line[prefix.len()..];
        let Some((idx, tail)) = rest.split_once(", ") else { continue };
        let Some((_, arg)) = tail.rsplit_once('&') else { continue };
        let arg = arg.trim_end_matches(");").trim_start_matches("buf_");
        let arg = if arg.starts_with("partition_size_") { "partition_size" } else { arg };
        if idx == "0" && !seen.is_empty() {
            break;
        }
        seen.push(arg.to_string());
    }
    seen
}

pub fn device_top_params(text: &str, kernel: &str) -> Option<Vec<String>> {
    let head = format!("extern \"C\" void {kernel}(");
    let line = text.lines().find(|l| l.starts_with(&head))?;
    let inner = &line[head.len()..line.rfind(')')?];
    Some(inner.split(", ").filter_map(|p| p.rsplit([' ', '*']).next()).map(str::to_string).collect())
}

/// Reads the golden manifest and checks it against the device and host files next to it.
pub fn manifest_cross_check(program: &str) -> Result<usize, String> {
    let dir = golden_dir(program);
    let text = std::fs::read_to_string(dir.join("manifest.json")).map_err(|e| e.to_string())?;
    let m: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let host_path = m["host"].as_str().ok_or("manifest without host")?;
    let host = std::fs::read_to_string(dir.join(host_path)).map_err(|e| e.to_string())?;
    let kernels = m["kernels"].as_array().ok_or("manifest without kernels")?;
    let strs = |v: &serde_json::Value| -> Vec<String> {
        v.as_array().map(|a| a.iter().filter_map(|x| x.as_str().map(str::to_string)).collect()).unwrap_or_default()
    };
    for k in kernels {
        let name = k["name"].as_str().ok_or("kernel without name")?;
        let file = k["file"].as_str().ok_or("kernel without file")?;
        let device = std::fs::read_to_string(dir.join(file)).map_err(|e| format!("{name}: {e}"))?;
        let args = strs(&k["arguments"]);
        let params = device_top_params(&device, name).ok_or(format!("{name}: no top function"))?;
        if params != args {
            return Err(format!("{name}: device parameters {params:?} != manifest {args:?}"));
        }
        let host_args = host_kernel_args(&host, name);
        if host_args != args {
            return Err(format!("{name}: host arguments {host_args:?} != manifest {args:?}"));
        }
        let functions = strs(&k["functions"]);
        if functions.len() != strs(&k["chain"]).len() {
            return Err(format!("{name}: chain and function lists differ in length"));
        }
        for f in &functions {
            if !device.contains(&format!("static void {f}(")) {
                return Err(format!("{name}: module function {f} missing"));
            }
        }
    }
    let units: Vec<u64> = m["properties"]
        .as_array()
        .map(|a| a.iter().filter_map(|p| p["memory_unit_id"].as_u64()).collect())
        .unwrap_or_default();
    if units.iter().enumerate().any(|(i, u)| *u != i as u64) {
        return Err(format!("memory unit ids not dense: {units:?}"));
    }
    Ok(kernels.len())
}

pub struct CliOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the built binary from the crate directory.
pub fn cli(args: &[&str], env: &[(&str, &str)]) -> CliOutput {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_graphitron"))
        .args(args)
        .envs(env.iter().copied())
        .env_remove("GRAPHITRON_REGOLDEN")
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .expect("binary runs");
    CliOutput {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

/// `(description, argv, environment, expected exit code)`
pub type ExitCase = (String, Vec<String>, Vec<(String, String)>, i32);

pub fn exit_code_matrix(scratch: &std::path::Path) -> Vec<ExitCase> {
    let bad_src = scratch.join("bad.gt");
    std::fs::write(&bad_src, "element Vertex end\nfunc main()\n    x = ;\nend\n").unwrap();
    let bad_graph = scratch.join("bad.txt");
    std::fs::write(&bad_graph, "0 1\n1 two\n").unwrap();
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    let p = |x: &std::path::Path| x.display().to_string();
    let g1 = "programs/graphs/g1.txt";
    vec![
        ("check ok".into(), s(&["check", "programs/bfs.gt"]), vec![], 0),
        ("run ok".into(), s(&["run", "programs/bfs.gt", "--", g1]), vec![], 0),
        ("sim ok".into(), s(&["sim", "programs/sssp.gt", "--stats", &p(&scratch.join("s.json")), "--", "programs/graphs/g2.txt"]), vec![], 0),
        ("malformed source".into(), vec!["check".into(), p(&bad_src)], vec![], 1),
        ("malformed source under run".into(), vec!["run".into(), p(&bad_src), "--".into(), g1.into()], vec![], 1),
        ("missing source".into(), s(&["check", "programs/nope.gt"]), vec![], 2),
        ("missing graph".into(), s(&["run", "programs/bfs.gt", "--", "programs/graphs/nope.txt"]), vec![], 2),
        ("malformed graph".into(), vec!["run".into(), "programs/bfs.gt".into(), "--".into(), p(&bad_graph)], vec![], 2),
        ("unweighted graph for sssp".into(), s(&["run", "programs/sssp.gt", "--", g1]), vec![], 2),
        ("missing argv".into(), s(&["run", "programs/bfs.gt"]), vec![], 2),
        ("iteration cap".into(), s(&["run", "programs/pagerank.gt", "--", g1]), vec![("GRAPHITRON_MAX_ITERS".into(), "1".into())], 2),
        ("bad iteration cap".into(), s(&["run", "programs/bfs.gt", "--", g1]), vec![("GRAPHITRON_MAX_ITERS".into(), "zero".into())], 3),
        ("lanes not a power of two".into(), s(&["check", "programs/bfs.gt", "--lanes", "3"]), vec![], 3),
        ("unknown subcommand".into(), s(&["frobnicate"]), vec![], 3),
        ("unknown flag".into(), s(&["check", "programs/bfs.gt", "--bogus"]), vec![], 3),
        ("unknown print name".into(), s(&["run", "programs/bfs.gt", "--print", "nope", "--", g1]), vec![], 3),
        ("zero cache lines".into(), s(&["sim", "programs/bfs.gt", "--cache-lines", "0", "--", g1]), vec![], 3),
        ("help".into(), s(&["--help"]), vec![], 0),
    ]
}
