//! Transaction-level simulator of the generated accelerator: executes a
//! kernel plan partition by partition and counts memory traffic.

mod cache;
mod shuffle;
mod stats;

pub use cache::CacheModel;
pub use shuffle::{bank_of, shuffle_apply, ShuffleOutcome, Update};
pub use stats::{report, KernelStats, NamedStats, ReportFormat, SimStats};

use std::collections::BTreeMap;

use thiserror::Error;

use crate::codegen::{KernelPlan, Module, PlanKernel};
use crate::graphio::{build_csr, partition, Graph, PartitionPlan, DEFAULT_URAM_BYTES};
use crate::interp::exec::finish_lanes;
use crate::interp::value::reduce;
use crate::interp::{
    check_inputs, execute, run_element, Element, LaneCells, Observer, ProcessEngine, Program, PropertyStore, RunOptions,
    RunResult, RuntimeError, TraceEntry, Value,
};
use crate::sema::*;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Processing elements, which is also the number of URAM banks.
    pub lanes: u32,
    pub uram_bytes: u64,
    pub cache_lines: usize,
    /// Words per cache line.
    pub line_size: usize,
    pub channels: u32,
    /// Words per burst.
    pub burst_length: usize,
    /// Replaces the fraction in the main loop's direction switch.
    pub frontier_threshold: Option<f64>,
    pub cache_enabled: bool,
    pub shuffle_model: bool,
    pub prefetch: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            lanes: 4,
            uram_bytes: DEFAULT_URAM_BYTES,
            cache_lines: 1024,
            line_size: 8,
            channels: DEFAULT_CHANNELS,
            burst_length: 64,
            frontier_threshold: None,
            cache_enabled: true,
            shuffle_model: true,
            prefetch: true,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |what: &str| Err(SimError::InvalidConfig(what.to_string()));
        if self.lanes == 0 || !self.lanes.is_power_of_two() {
            return bad("lanes must be a power of two");
        }
        if self.uram_bytes == 0 || self.cache_lines == 0 || self.line_size == 0 || self.channels == 0 || self.burst_length == 0 {
            return bad("uram-bytes, cache-lines, line-size, channels and burst-length must be positive");
        }
        if let Some(t) = self.frontier_threshold {
            if !(t.is_finite() && t > 0.0) {
                return bad("frontier threshold must be a positive number");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SimError {
    #[error("invalid simulator configuration: {0}")]
    InvalidConfig(String),
    #[error("kernel plan does not match the program: {0}")]
    PlanMismatch(String),
    #[error("partition size {found} does not match the URAM budget, which gives {expected}")]
    PartitionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimRun {
    pub result: RunResult,
    pub stats: SimStats,
}

/// Bytes of on-chip state per destination vertex: the largest need of any
/// unordered kernel.
pub fn bytes_per_vertex(plan: &KernelPlan) -> u64 {
    plan.kernels
        .iter()
        .filter(|k| k.stream == UpdateStreamClass::Unordered)
        .map(PlanKernel::bytes_per_vertex)
        .max()
        .unwrap_or(4)
}

/// Sets the fraction literal of every `if` in `main` that chooses between a
/// vertex-centric traversal and another invocation. Returns how many literals changed.
pub fn set_frontier_threshold(mir: &mut MirProgram, fraction: f64) -> usize {
    let traversal: Vec<InvocationId> = mir
        .schedule
        .iter()
        .filter(|i| i.model == Some(ProcessingModel::VcpTraversal))
        .map(|i| i.id)
        .collect();
    let invokes_traversal = |body: &[Stmt]| {
        let mut found = false;
        walk_stmts(body, &mut |s| found |= matches!(s.kind, StmtKind::Invoke(id) if traversal.contains(&id)));
        found
    };
    let mut changed = 0;
    walk_stmts_mut(&mut mir.main.body, &mut |s| {
        if let StmtKind::If { cond, then_body, else_body } = &mut s.kind {
            if invokes_traversal(then_body) || invokes_traversal(else_body) {
                cond.visit_mut(&mut |e| {
                    if let ExprKind::Float(v) = &mut e.kind {
                        *v = fraction;
                        changed += 1;
                    }
                });
            }
        }
    });
    changed
}

fn check_plan(plan: &KernelPlan, mir: &MirProgram, config: &SimConfig) -> Result<(), SimError> {
    if plan.lanes != config.lanes {
        return Err(SimError::PlanMismatch(format!("plan has {} lanes, configuration {}", plan.lanes, config.lanes)));
    }
    for inv in mir.process_invocations() {
        let name = &mir.functions[inv.function].name;
        match plan.kernel_for(inv.function) {
            Some(k) if k.name == *name && Some(k.model) == inv.model => {}
            Some(k) => return Err(SimError::PlanMismatch(format!("kernel `{}` planned for `{name}`", k.name))),
            None => return Err(SimError::PlanMismatch(format!("no kernel for `{name}`"))),
        }
    }
    Ok(())
}

/// Simulates `plan` with partitions derived from the URAM budget.
pub fn simulate(plan: &KernelPlan, mir: &MirProgram, graph: &Graph, config: &SimConfig, args: &[String]) -> Result<SimRun, SimError> {
    let parts = partition(graph, config.uram_bytes, bytes_per_vertex(plan));
    simulate_with(plan, mir, graph, &parts, config, args, RunOptions::default())
}

pub fn simulate_with(
    plan: &KernelPlan,
    mir: &MirProgram,
    graph: &Graph,
    partitions: &PartitionPlan,
    config: &SimConfig,
    args: &[String],
    options: RunOptions,
) -> Result<SimRun, SimError> {
    config.validate()?;
    let expected = crate::graphio::partition_size(config.uram_bytes, bytes_per_vertex(plan));
    if partitions.size != expected {
        return Err(SimError::PartitionMismatch { expected, found: partitions.size });
    }
    let mut mir = mir.clone();
    if let Some(t) = config.frontier_threshold {
        set_frontier_threshold(&mut mir, t);
    }
    check_plan(plan, &mir, config)?;
    check_inputs(&mir, graph, args)?;
    let csr = build_csr(graph);
    let p = Program { mir: &mir, graph, csr: &csr };
    let mut engine = SimEngine::new(plan, config, partitions, &p);
    let result = execute(&p, options, &mut engine)?;
    Ok(SimRun { result, stats: engine.stats })
}

/// Word addresses of vector properties, each starting on a line boundary.
fn layout(p: &Program, line: u64) -> Vec<u64> {
    let mut next = 0u64;
    p.mir
        .properties
        .iter()
        .map(|info| {
            let base = next;
            let len = match info.element_kind {
                ElementKind::Edge => p.graph.edge_count(),
                ElementKind::Vertex => p.graph.vertex_count,
                _ => 0,
            } as u64;
            next += len.div_ceil(line) * line;
            base
        })
        .collect()
}

struct SimEngine<'s> {
    plan: &'s KernelPlan,
    config: &'s SimConfig,
    partitions: &'s PartitionPlan,
    bases: Vec<u64>,
    cache: Option<CacheModel>,
    stats: SimStats,
}

/// Access recorder for one kernel execution.
struct Recorder<'r> {
    bases: &'r [u64],
    cache: Option<&'r mut CacheModel>,
    capturable: Vec<PropId>,
    captured: Vec<Update>,
    read_now: Vec<bool>,
    written_now: Vec<bool>,
    owned_reads: Vec<u64>,
    owned_writes: Vec<u64>,
    uncached_reads: u64,
    random_writes: u64,
}

impl Recorder<'_> {
    fn end_element(&mut self) {
        for (i, r) in self.read_now.iter_mut().enumerate() {
            self.owned_reads[i] += u64::from(std::mem::take(r));
        }
        for (i, w) in self.written_now.iter_mut().enumerate() {
            self.owned_writes[i] += u64::from(std::mem::take(w));
        }
    }
}

impl Observer for Recorder<'_> {
    fn read(&mut self, prop: PropId, index: usize, owned: bool) {
        if owned {
            self.read_now[prop] = true;
        } else if let Some(c) = self.cache.as_deref_mut() {
            c.access(self.bases[prop] + index as u64);
        } else {
            self.uncached_reads += 1;
        }
    }

    fn write(&mut self, prop: PropId, _index: usize, owned: bool, op: Option<ReduceOp>) {
        if owned {
            self.written_now[prop] = true;
        } else if op.is_none() || !self.capturable.contains(&prop) {
            self.random_writes += 1;
        }
    }

    fn capture(&mut self, prop: PropId, index: usize, op: ReduceOp, value: Value) -> bool {
        if !self.capturable.contains(&prop) {
            return false;
        }
        self.captured.push(Update { prop, index, op, value });
        true
    }
}

/// Properties whose updates can travel through the shuffle: reduced at a
/// non-owned index with a single operator and otherwise untouched by the kernel.
fn capturable(f: &MirFunction) -> Vec<PropId> {
    let fx = &f.effects;
    let mut out = Vec::new();
    for a in &fx.reductions {
        if a.index == IndexClass::Owned || out.contains(&a.prop) {
            continue;
        }
        let single_op = fx.reductions.iter().filter(|b| b.prop == a.prop).all(|b| b.op == a.op && b.index != IndexClass::Owned);
        let untouched = !fx.reads_prop(a.prop)
            && !fx.writes.iter().any(|b| b.prop == a.prop)
            && !fx.lane_accumulations.iter().any(|b| b.prop == a.prop);
        if single_op && untouched {
            out.push(a.prop);
        }
    }
    out
}

struct Counter {
    stats: KernelStats,
    burst: u64,
}

impl Counter {
    fn stream(&mut self, words: u64) {
        if words > 0 {
            self.stats.sequential_words += words;
            self.stats.bursts += words.div_ceil(self.burst);
        }
    }
}

impl<'s> SimEngine<'s> {
    fn new(plan: &'s KernelPlan, config: &'s SimConfig, partitions: &'s PartitionPlan, p: &Program) -> Self {
        SimEngine {
            plan,
            config,
            partitions,
            bases: layout(p, config.line_size as u64),
            cache: config.cache_enabled.then(|| CacheModel::new(config.cache_lines, config.line_size, config.prefetch)),
            stats: SimStats::default(),
        }
    }

    /// Applies captured updates partition by partition through a URAM image.
    fn drain(&self, store: &mut PropertyStore, updates: Vec<Update>, c: &mut Counter) -> Result<(), RuntimeError> {
        let size = self.partitions.size.max(1);
        let mut groups: BTreeMap<usize, Vec<Update>> = BTreeMap::new();
        for u in updates {
            groups.entry(u.index / size).or_default().push(u);
        }
        for (part, ups) in groups {
            c.stats.uram_partitions += 1;
            let start = part * size;
            let mut props: Vec<PropId> = ups.iter().map(|u| u.prop).collect();
            props.sort_unstable();
            props.dedup();
            let mut images: Vec<Vec<Value>> = Vec::with_capacity(props.len());
            for &prop in &props {
                let end = (start + size).min(store.values[prop].len());
                c.stream((end - start) as u64);
                images.push(store.values[prop][start..end].to_vec());
            }
            let mut apply = |u: &Update| -> Result<(), RuntimeError> {
                let slot = props.binary_search(&u.prop).expect("captured property");
                let cell = &mut images[slot][u.index - start];
                *cell = reduce(u.op, *cell, u.value)?;
                Ok(())
            };
            if self.config.shuffle_model {
                let out = shuffle_apply(&ups, self.config.lanes as usize, &mut apply)?;
                c.stats.shuffle_routings += out.routings;
                c.stats.bank_conflict_stalls += out.stalls;
                c.stats.bank_violations += out.violations;
            } else {
                for u in &ups {
                    apply(u)?;
                }
            }
            for (&prop, image) in props.iter().zip(images) {
                c.stream(image.len() as u64);
                store.values[prop][start..start + image.len()].copy_from_slice(&image);
            }
        }
        Ok(())
    }
}

impl ProcessEngine for SimEngine<'_> {
    fn process(&mut self, p: &Program, store: &mut PropertyStore, inv: &Invocation) -> Result<TraceEntry, RuntimeError> {
        let func = &p.mir.functions[inv.function];
        let k = self.plan.kernel_for(inv.function).expect("plan checked before simulation");
        let unordered = k.stream == UpdateStreamClass::Unordered;
        let order: Vec<Element> = match inv.set {
            SetKind::Edges if unordered => self.partitions.edge_order().map(Element::Edge).collect(),
            SetKind::Edges => (0..p.graph.edge_count()).map(Element::Edge).collect(),
            SetKind::Vertices => (0..p.graph.vertex_count).map(Element::Vertex).collect(),
        };
        let nprops = p.mir.properties.len();
        let before = self.cache.as_ref().map(|c| (c.hits, c.misses, c.prefetches));
        let mut rec = Recorder {
            bases: &self.bases,
            cache: self.cache.as_mut(),
            capturable: if unordered { capturable(func) } else { vec![] },
            captured: Vec::new(),
            read_now: vec![false; nprops],
            written_now: vec![false; nprops],
            owned_reads: vec![0; nprops],
            owned_writes: vec![0; nprops],
            uncached_reads: 0,
            random_writes: 0,
        };
        let mut lanes = LaneCells::new(func);
        let mut neighbors = 0;
        for &el in &order {
            neighbors += run_element(p, store, func, el, &mut lanes, &mut rec)?.neighbors;
            rec.end_element();
        }
        let lane_writes = finish_lanes(p, store, func, lanes)?;

        let mut c = Counter { stats: KernelStats { invocations: 1, ..Default::default() }, burst: self.config.burst_length as u64 };
        let (elements, vertices) = (order.len() as u64, p.graph.vertex_count as u64);
        match k.model {
            ProcessingModel::Ecp => {
                c.stats.edges_examined = elements;
                c.stream(elements);
                c.stream(elements);
                if k.has(Module::EdgePropRead) {
                    c.stream(elements);
                }
            }
            ProcessingModel::VcpTraversal => {
                c.stats.edges_examined = neighbors as u64;
                c.stats.vertices_swept = vertices;
                c.stream(vertices);
                c.stream(neighbors as u64);
            }
            ProcessingModel::VcpApply => {
                c.stats.edges_examined = neighbors as u64;
                c.stats.vertices_swept = vertices;
            }
        }
        for words in rec.owned_reads.iter().chain(&rec.owned_writes) {
            c.stream(*words);
        }
        for _ in k.properties.iter().filter(|b| b.scalar.is_some()) {
            c.stream(1);
        }
        for _ in &lane_writes {
            c.stream(1);
        }
        c.stats.random_words += rec.uncached_reads + rec.random_writes;
        c.stats.bursts += rec.uncached_reads + rec.random_writes;
        let captured = std::mem::take(&mut rec.captured);
        drop(rec);
        if let (Some(cache), Some((h, m, pf))) = (self.cache.as_ref(), before) {
            c.stats.cache_hits += cache.hits - h;
            c.stats.cache_misses += cache.misses - m;
            c.stats.prefetches += cache.prefetches - pf;
            let lines = cache.misses - m + cache.prefetches - pf;
            c.stats.random_words += lines * cache.line_size();
            c.stats.bursts += lines * cache.line_size().div_ceil(c.burst);
        }
        self.drain(store, captured, &mut c)?;

        if let Some(cache) = self.cache.as_mut() {
            let fx = &func.effects;
            for prop in fx.writes.iter().chain(&fx.reductions).chain(&fx.lane_accumulations).map(|a| a.prop) {
                let len = store.values[prop].len() as u64;
                cache.invalidate(self.bases[prop], self.bases[prop] + len);
            }
        }
        self.stats.add(&k.name, c.stats);
        Ok(TraceEntry {
            invocation: inv.id,
            kernel: func.name.clone(),
            model: inv.model,
            elements: order.len(),
            edges_examined: c.stats.edges_examined as usize,
        })
    }
}
