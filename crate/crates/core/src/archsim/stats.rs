//! Simulation counters and their rendering.

use std::fmt::Write as _;
use std::ops::AddAssign;

use serde::Serialize;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct KernelStats {
    pub invocations: u64,
    pub edges_examined: u64,
    pub vertices_swept: u64,
    pub sequential_words: u64,
    pub random_words: u64,
    pub cache_hits: u64,
    pub cache_misses: u64,
    pub prefetches: u64,
    pub shuffle_routings: u64,
    pub bank_conflict_stalls: u64,
    pub bank_violations: u64,
    pub bursts: u64,
    pub uram_partitions: u64,
}

impl AddAssign for KernelStats {
    fn add_assign(&mut self, o: Self) {
        self.invocations += o.invocations;
        self.edges_examined += o.edges_examined;
        self.vertices_swept += o.vertices_swept;
        self.sequential_words += o.sequential_words;
        self.random_words += o.random_words;
        self.cache_hits += o.cache_hits;
        self.cache_misses += o.cache_misses;
        self.prefetches += o.prefetches;
        self.shuffle_routings += o.shuffle_routings;
        self.bank_conflict_stalls += o.bank_conflict_stalls;
        self.bank_violations += o.bank_violations;
        self.bursts += o.bursts;
        self.uram_partitions += o.uram_partitions;
    }
}

impl KernelStats {
    pub fn fields(&self) -> [(&'static str, u64); 13] {
        [
            ("invocations", self.invocations),
            ("edges_examined", self.edges_examined),
            ("vertices_swept", self.vertices_swept),
            ("sequential_words", self.sequential_words),
            ("random_words", self.random_words),
            ("cache_hits", self.cache_hits),
            ("cache_misses", self.cache_misses),
            ("prefetches", self.prefetches),
            ("shuffle_routings", self.shuffle_routings),
            ("bank_conflict_stalls", self.bank_conflict_stalls),
            ("bank_violations", self.bank_violations),
            ("bursts", self.bursts),
            ("uram_partitions", self.uram_partitions),
        ]
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct NamedStats {
    pub kernel: String,
    #[serde(flatten)]
    pub stats: KernelStats,
}

/// Counters per kernel, in first-execution order, plus their sum.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SimStats {
    pub kernels: Vec<NamedStats>,
    pub totals: KernelStats,
}

impl SimStats {
    pub fn kernel(&self, name: &str) -> Option<&KernelStats> {
        self.kernels.iter().find(|k| k.kernel == name).map(|k| &k.stats)
    }

    pub(crate) fn add(&mut self, name: &str, s: KernelStats) {
        match self.kernels.iter_mut().find(|k| k.kernel == name) {
            Some(k) => k.stats += s,
            None => self.kernels.push(NamedStats { kernel: name.to_string(), stats: s }),
        }
        self.totals += s;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Table,
}

pub fn report(stats: &SimStats, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(stats).expect("stats serialize");
            s.push('\n');
            s
        }
        ReportFormat::Table => table(stats),
    }
}

fn table(stats: &SimStats) -> String {
    let mut cols: Vec<(&str, &KernelStats)> = stats.kernels.iter().map(|k| (k.kernel.as_str(), &k.stats)).collect();
    cols.push(("total", &stats.totals));
    let names = KernelStats::default().fields().map(|(n, _)| n);
    let label_w = names.iter().map(|n| n.len()).max().unwrap_or(0);
    let widths: Vec<usize> = cols
        .iter()
        .map(|(name, s)| s.fields().iter().map(|(_, v)| v.to_string().len()).chain([name.len()]).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    let _ = write!(out, "{:<label_w$}", "counter");
    for ((name, _), w) in cols.iter().zip(&widths) {
        let _ = write!(out, "  {name:>w$}");
    }
    out.push('\n');
    for (i, label) in names.iter().enumerate() {
        let _ = write!(out, "{label:<label_w$}");
        for ((_, s), w) in cols.iter().zip(&widths) {
            let _ = write!(out, "  {:>w$}", s.fields()[i].1);
        }
        out.push('\n');
    }
    out
}
