//! Compiler, reference interpreter and dataflow simulator for the Graphitron
//! graph-processing language.

pub mod archsim;
pub mod cli;
pub mod codegen;
pub mod diag;
pub mod frontend;
pub mod graphio;
pub mod interp;
pub mod passes;
pub mod sema;

/// Source text of the bundled programs.
pub mod programs {
    pub const BFS: &str = include_str!("../programs/bfs.gt");
    pub const HYBRID_BFS: &str = include_str!("../programs/hybrid_bfs.gt");
    pub const SSSP: &str = include_str!("../programs/sssp.gt");
    pub const PAGERANK: &str = include_str!("../programs/pagerank.gt");
    pub const PPR: &str = include_str!("../programs/ppr.gt");
    pub const CGAW: &str = include_str!("../programs/cgaw.gt");

    /// `(name, source)` for every bundled program.
    pub const ALL: [(&str, &str); 6] = [
        ("bfs", BFS),
        ("hybrid_bfs", HYBRID_BFS),
        ("sssp", SSSP),
        ("pagerank", PAGERANK),
        ("ppr", PPR),
        ("cgaw", CGAW),
    ];

    pub fn get(name: &str) -> Option<&'static str> {
        ALL.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
    }

    /// Rewrites the hard-coded source vertex of a bundled program to `root`.
    /// Returns `None` for programs without a source vertex.
    pub fn with_root(name: &str, root: u32) -> Option<String> {
        let src = get(name)?;
        let lines: &[&str] = match name {
            "bfs" | "hybrid_bfs" => &["old_level[1] = 1;", "new_level[1] = 1;"],
            "sssp" => &["SP[0] = 0;", "SP_prev[0] = 0;"],
            "ppr" => &["PR_old[1] = score_init;", "map[1] = 1.0;"],
            _ => return None,
        };
        let mut out = src.to_string();
        for line in lines {
            let (head, tail) = line.split_once('[').unwrap();
            let rest = &tail[tail.find(']').unwrap()..];
            out = out.replace(line, &format!("{head}[{root}{rest}"));
        }
        Some(out)
    }
}
