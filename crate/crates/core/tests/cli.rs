mod common;

use common::cli;

fn values(stdout: &str) -> Vec<String> {
    stdout.lines().filter(|l| !l.starts_with('#')).map(str::to_string).collect()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    for (what, argv, env, want) in common::exit_code_matrix(dir.path()) {
        let argv: Vec<&str> = argv.iter().map(String::as_str).collect();
        let env: Vec<(&str, &str)> = env.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
        let out = cli(&argv, &env);
        assert_eq!(out.code, want, "{what}: stderr = {}", out.stderr);
    }
}

#[test]
fn diagnostics_name_the_file_and_position() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("bad.gt");
    let text = graphitron::programs::BFS.replace("old_level[v] = new_level[v];", "old_level[v] = missing[v];");
    std::fs::write(&src, text).unwrap();
    let out = cli(&["check", src.to_str().unwrap()], &[]);
    assert_eq!(out.code, 1);
    let first = out.stderr.lines().next().unwrap();
    assert!(first.starts_with(&format!("{}:28:", src.display())), "{first}");
    assert!(first.contains("missing"), "{first}");
    assert!(first.contains(": error: "), "{first}");
}

#[test]
fn check_reports_kernel_counts() {
    let out = cli(&["check", "programs/cgaw.gt"], &[]);
    assert_eq!(out.code, 0);
    assert_eq!(out.stdout.trim(), "programs/cgaw.gt: ok (2 kernels)");
}

#[test]
fn cgaw_attention_on_the_small_graph() {
    let out = cli(&["run", "programs/cgaw.gt", "--print", "attention", "--", "programs/graphs/g2.txt"], &[]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let got: Vec<f64> = values(&out.stdout).iter().map(|l| l.parse().unwrap()).collect();
    let want = [0.4, 0.6, 1.0];
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() < 1e-12, "{got:?}");
    }
}

#[test]
fn run_and_sim_print_the_same_values() {
    for (prog, graph, print) in [
        ("bfs", "g1.txt", "level"),
        ("hybrid_bfs", "g1.txt", "level"),
        ("sssp", "g2.txt", "SP"),
        ("pagerank", "g1.txt", "PR_old"),
        ("ppr", "g1.txt", "PR_old"),
        ("cgaw", "g2.txt", "attention"),
    ] {
        let src = format!("programs/{prog}.gt");
        let graph = format!("programs/graphs/{graph}");
        let run = cli(&["run", &src, "--print", print, "--", &graph], &[]);
        let sim = cli(&["sim", &src, "--print", print, "--", &graph], &[]);
        assert_eq!((run.code, sim.code), (0, 0), "{prog}: {} {}", run.stderr, sim.stderr);
        let a: Vec<f64> = values(&run.stdout).iter().map(|l| l.parse().unwrap()).collect();
        let b: Vec<f64> = values(&sim.stdout).iter().map(|l| l.parse().unwrap()).collect();
        assert_eq!(a.len(), b.len(), "{prog}");
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0), "{prog}: {x} vs {y}");
        }
    }
}

#[test]
fn repeated_invocations_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let stats = dir.path().join("stats.json");
    let stats = stats.to_str().unwrap();
    let cases: [&[&str]; 4] = [
        &["run", "programs/pagerank.gt", "--json", "--", "programs/graphs/g1.txt"],
        &["sim", "programs/bfs.gt", "--json", "--stats", stats, "--", "programs/graphs/g1.txt"],
        &["dump-mir", "programs/sssp.gt", "--json"],
        &["dump-plan", "programs/hybrid_bfs.gt"],
    ];
    for argv in cases {
        let a = cli(argv, &[]);
        let sa = std::fs::read(stats).ok();
        let b = cli(argv, &[]);
        let sb = std::fs::read(stats).ok();
        assert_eq!(a.code, 0, "{argv:?}: {}", a.stderr);
        assert_eq!((a.stdout, a.stderr), (b.stdout, b.stderr), "{argv:?}");
        assert_eq!(sa, sb);
    }
}

#[test]
fn emit_writes_manifest_and_refuses_to_clobber() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bfs");
    let o = out.to_str().unwrap();
    assert_eq!(cli(&["emit", "programs/bfs.gt", "-o", o], &[]).code, 0);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["kernels"].as_array().unwrap().len(), 3);
    // Same output again is fine.
    assert_eq!(cli(&["emit", "programs/bfs.gt", "-o", o], &[]).code, 0);
    let host = out.join("host/main.c-like");
    std::fs::write(&host, "stale").unwrap();
    assert_eq!(cli(&["emit", "programs/bfs.gt", "-o", o], &[]).code, 2);
    assert_eq!(std::fs::read_to_string(&host).unwrap(), "stale");
    assert_eq!(cli(&["emit", "programs/bfs.gt", "-o", o, "--regolden"], &[]).code, 0);
    assert_ne!(std::fs::read_to_string(&host).unwrap(), "stale");
}

#[test]
fn emit_matches_golden_tree() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sssp");
    assert_eq!(cli(&["emit", "programs/sssp.gt", "-o", out.to_str().unwrap()], &[]).code, 0);
    let golden = common::golden_dir("sssp");
    for (rel, _) in common::emit_program("sssp").files() {
        assert_eq!(std::fs::read(out.join(&rel)).unwrap(), std::fs::read(golden.join(&rel)).unwrap(), "{rel}");
    }
}

#[test]
fn in_process_entry_point() {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = graphitron::cli::run(["graphitron", "check", "programs/ppr.gt"].map(|s| {
        if s.ends_with(".gt") {
            format!("{}/{s}", env!("CARGO_MANIFEST_DIR"))
        } else {
            s.to_string()
        }
    }), &mut out, &mut err);
    assert_eq!(code, graphitron::cli::EXIT_OK);
    assert!(String::from_utf8(out).unwrap().ends_with("ok (3 kernels)\n"));
    let code = graphitron::cli::run(["graphitron", "--version"], &mut Vec::new(), &mut Vec::new());
    assert_eq!(code, graphitron::cli::EXIT_OK);
}

#[test]
fn pass_report_goes_to_stderr() {
    let out = cli(&["check", "programs/sssp.gt", "--dump-pass-report"], &[]);
    assert_eq!(out.code, 0);
    let report: serde_json::Value = serde_json::from_str(out.stderr.trim()).unwrap();
    assert!(report.is_array() || report.is_object());
    let none = cli(&["check", "programs/sssp.gt", "--no-passes"], &[]);
    assert_eq!(none.stdout.trim(), "programs/sssp.gt: ok (2 kernels)");
}
