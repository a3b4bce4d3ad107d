mod common;

use graphitron::programs;

#[test]
fn emitted_code_matches_golden_files() {
    let regolden = std::env::var("GRAPHITRON_REGOLDEN").is_ok_and(|v| v == "1");
    for (name, _) in programs::ALL {
        if regolden {
            let dir = common::golden_dir(name);
            let _ = std::fs::remove_dir_all(&dir);
            common::emit_program(name).write_to(&dir).unwrap();
        }
        let bad = common::golden_mismatches(name);
        assert!(bad.is_empty(), "{name}: {bad:?} (rerun with GRAPHITRON_REGOLDEN=1 after reviewing)");
    }
}

#[test]
fn golden_manifests_agree_with_sources() {
    let counts: Vec<usize> = programs::ALL
        .iter()
        .map(|(name, _)| common::manifest_cross_check(name).unwrap_or_else(|e| panic!("{name}: {e}")))
        .collect();
    assert_eq!(counts, [3, 4, 3, 3, 3, 2]);
}

#[test]
fn emission_is_stable_across_runs() {
    for (name, _) in programs::ALL {
        assert_eq!(common::emit_program(name).files(), common::emit_program(name).files(), "{name}");
    }
}
