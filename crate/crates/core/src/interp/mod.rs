//! Reference interpreter: sequential, ascending-index execution of MIR.

pub mod exec;
pub mod store;
pub mod value;

pub use exec::{run_element, Element, LaneCells, NoObserver, Observer, Program};
pub use store::{vector_names, PropertyStore};
pub use value::Value;

use serde::Serialize;
use thiserror::Error;

use crate::graphio::{build_csr, load_graph, Graph, GraphError};
use crate::sema::{GraphSource, Invocation, InvocationId, LoopId, MirProgram, Operator, ProcessingModel, SetKind};
use exec::{finish_lanes, run_main, HostHooks};

pub const DEFAULT_MAX_ITERS: u64 = 10_000;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum RuntimeError {
    #[error("integer overflow in `{op}`")]
    Overflow { op: String },
    #[error("index {index} out of bounds for `{property}` of length {len}")]
    IndexOutOfBounds { property: String, index: i64, len: usize },
    #[error("division by zero")]
    DivisionByZero,
    #[error("missing runtime argument argv[{index}]")]
    MissingArgument { index: u32 },
    #[error("NaN produced or consumed")]
    NotANumber,
    #[error("loop exceeded {limit} iterations")]
    IterationLimit { limit: u64 },
    #[error("the program declares a {declared} edgeset but the graph is {loaded}")]
    WeightMismatch { declared: &'static str, loaded: &'static str },
    #[error("{0}")]
    Graph(#[from] GraphError),
}

/// One executed invocation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    pub invocation: InvocationId,
    pub kernel: String,
    pub model: Option<ProcessingModel>,
    pub elements: usize,
    pub edges_examined: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub store: PropertyStore,
    /// Total iterations executed by each `while` loop, by loop id.
    pub loop_iterations: Vec<u64>,
    pub trace: Vec<TraceEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Per-execution iteration guard for every `while` loop.
    pub max_iters: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { max_iters: DEFAULT_MAX_ITERS }
    }
}

/// Executes `process` invocations. The reference engine sweeps elements in
/// ascending order; the simulator substitutes its own.
pub trait ProcessEngine {
    fn process(&mut self, p: &Program, store: &mut PropertyStore, inv: &Invocation) -> Result<TraceEntry, RuntimeError>;
}

pub struct ReferenceEngine;

impl ProcessEngine for ReferenceEngine {
    fn process(&mut self, p: &Program, store: &mut PropertyStore, inv: &Invocation) -> Result<TraceEntry, RuntimeError> {
        sweep(p, store, inv, &mut NoObserver)
    }
}

/// Applies an invocation's function to every element in ascending order.
pub fn sweep(p: &Program, store: &mut PropertyStore, inv: &Invocation, obs: &mut dyn Observer) -> Result<TraceEntry, RuntimeError> {
    let func = &p.mir.functions[inv.function];
    let mut lanes = LaneCells::new(func);
    let (count, make): (usize, fn(usize) -> Element) = match inv.set {
        SetKind::Vertices => (p.graph.vertex_count, Element::Vertex),
        SetKind::Edges => (p.graph.edge_count(), Element::Edge),
    };
    let mut neighbors = 0;
    for i in 0..count {
        neighbors += run_element(p, store, func, make(i), &mut lanes, obs)?.neighbors;
    }
    finish_lanes(p, store, func, lanes)?;
    let edges_examined = match inv.set {
        SetKind::Edges => count,
        SetKind::Vertices => neighbors,
    };
    Ok(TraceEntry {
        invocation: inv.id,
        kernel: func.name.clone(),
        model: inv.model,
        elements: count,
        edges_examined,
    })
}

struct Driver<'d, 'a> {
    p: &'d Program<'a>,
    engine: &'d mut dyn ProcessEngine,
    options: RunOptions,
    trace: Vec<TraceEntry>,
    loops: Vec<u64>,
}

impl HostHooks for Driver<'_, '_> {
    fn invoke(&mut self, store: &mut PropertyStore, id: InvocationId) -> Result<(), RuntimeError> {
        let inv = &self.p.mir.schedule[id];
        let entry = match inv.op {
            Operator::Init => sweep(self.p, store, inv, &mut NoObserver)?,
            Operator::Process => self.engine.process(self.p, store, inv)?,
        };
        self.trace.push(entry);
        Ok(())
    }

    fn loop_iteration(&mut self, id: LoopId, count: u64) -> Result<(), RuntimeError> {
        if count > self.options.max_iters {
            return Err(RuntimeError::IterationLimit { limit: self.options.max_iters });
        }
        self.loops[id] += 1;
        Ok(())
    }
}

/// Checks that `args` supply the graph argument and the graph's weightedness
/// matches the edgeset declaration.
pub fn check_inputs(mir: &MirProgram, graph: &Graph, args: &[String]) -> Result<(), RuntimeError> {
    if let GraphSource::Argv(k) = mir.graph.source {
        if k == 0 || args.len() < k as usize {
            return Err(RuntimeError::MissingArgument { index: k });
        }
    }
    let label = |w: bool| if w { "weighted" } else { "unweighted" };
    if mir.graph.weighted != graph.weighted {
        return Err(RuntimeError::WeightMismatch { declared: label(mir.graph.weighted), loaded: label(graph.weighted) });
    }
    Ok(())
}

/// Resolves the program's `load(...)` argument against runtime arguments;
/// `argv[k]` is the k-th argument, counting from 1.
pub fn graph_path(mir: &MirProgram, args: &[String]) -> Result<String, RuntimeError> {
    match &mir.graph.source {
        GraphSource::Path(p) => Ok(p.clone()),
        GraphSource::Argv(k) => match (*k as usize).checked_sub(1).and_then(|i| args.get(i)) {
            Some(p) => Ok(p.clone()),
            None => Err(RuntimeError::MissingArgument { index: *k }),
        },
    }
}

/// Loads the graph named by the program's `load(...)`.
pub fn load_program_graph(mir: &MirProgram, args: &[String]) -> Result<Graph, RuntimeError> {
    Ok(load_graph(graph_path(mir, args)?, mir.graph.weighted)?)
}

/// Runs `main` with a caller-supplied process engine.
pub fn execute(p: &Program, options: RunOptions, engine: &mut dyn ProcessEngine) -> Result<RunResult, RuntimeError> {
    let mut store = PropertyStore::new(p)?;
    let mut driver = Driver { p, engine, options, trace: vec![], loops: vec![0; p.mir.loop_count] };
    run_main(p, &mut store, &mut driver)?;
    Ok(RunResult { store, loop_iterations: driver.loops, trace: driver.trace })
}

pub fn run(mir: &MirProgram, graph: &Graph, args: &[String]) -> Result<RunResult, RuntimeError> {
    run_with_options(mir, graph, args, RunOptions::default())
}

pub fn run_with_options(mir: &MirProgram, graph: &Graph, args: &[String], options: RunOptions) -> Result<RunResult, RuntimeError> {
    check_inputs(mir, graph, args)?;
    let csr = build_csr(graph);
    let p = Program { mir, graph, csr: &csr };
    execute(&p, options, &mut ReferenceEngine)
}

/// Applies exactly one scheduled invocation to `store`.
pub fn run_step(mir: &MirProgram, graph: &Graph, store: &mut PropertyStore, invocation: InvocationId) -> Result<TraceEntry, RuntimeError> {
    let csr = build_csr(graph);
    let p = Program { mir, graph, csr: &csr };
    sweep(&p, store, &mir.schedule[invocation], &mut NoObserver)
}

/// A fresh store for `mir` over `graph`, with scalar initializers applied.
pub fn initial_store(mir: &MirProgram, graph: &Graph) -> Result<PropertyStore, RuntimeError> {
    let csr = build_csr(graph);
    PropertyStore::new(&Program { mir, graph, csr: &csr })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::programs;
    use crate::sema::compile_source;

    fn g1() -> Graph {
        Graph::unweighted(&[(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)])
    }

    fn g2() -> Graph {
        Graph::weighted(&[(0, 1, 2), (0, 2, 3), (1, 2, 1)])
    }

    fn args() -> Vec<String> {
        vec!["graph.txt".into()]
    }

    fn ints(r: &RunResult, name: &str) -> Vec<i64> {
        r.store.property(name).unwrap().iter().map(|v| v.as_int()).collect()
    }

    fn floats(r: &RunResult, name: &str) -> Vec<f64> {
        r.store.property(name).unwrap().iter().map(|v| v.as_float()).collect()
    }

    #[test]
    fn bfs_g1_from_zero() {
        let mir = compile_source(&programs::with_root("bfs", 0).unwrap()).unwrap();
        let r = run(&mir, &g1(), &args()).unwrap();
        assert_eq!(ints(&r, "old_level"), vec![1, 2, 2, 3]);
        assert_eq!(r.loop_iterations, vec![3]);
        let ecp: usize = r.trace.iter().filter(|t| t.kernel == "EdgeTraversal").map(|t| t.edges_examined).sum();
        assert_eq!(ecp, 15);
        assert_eq!(r.trace.len(), 1 + 3 * 3);
    }

    #[test]
    fn bfs_bundled_root() {
        let mir = compile_source(programs::BFS).unwrap();
        let r = run(&mir, &g1(), &args()).unwrap();
        assert_eq!(ints(&r, "old_level"), vec![-1, 1, 2, 2]);
    }

    #[test]
    fn init_reset() {
        let mir = compile_source(programs::BFS).unwrap();
        let g = g1();
        let mut store = initial_store(&mir, &g).unwrap();
        run_step(&mir, &g, &mut store, 0).unwrap();
        assert!(store.property("old_level").unwrap().iter().all(|v| *v == Value::Int(-1)));
        assert!(store.property("new_level").unwrap().iter().all(|v| *v == Value::Int(-1)));
    }

    #[test]
    fn single_edge_sweep() {
        let mir = compile_source(programs::BFS).unwrap();
        let g = g1();
        let mut store = initial_store(&mir, &g).unwrap();
        run_step(&mir, &g, &mut store, 0).unwrap();
        let old = store.prop_id("old_level").unwrap();
        store.values[old][0] = Value::Int(1);
        let before = store.clone();
        let t = run_step(&mir, &g, &mut store, 1).unwrap();
        assert_eq!(t.edges_examined, 5);
        let tuple = store.prop_id("tuple").unwrap();
        let inf = Value::Int(2147483647);
        assert_eq!(store.values[tuple], vec![inf, Value::Int(2), Value::Int(2), inf]);
        for (i, name) in store.names.iter().enumerate() {
            if name != "tuple" {
                assert_eq!(store.values[i], before.values[i], "{name}");
            }
        }
    }

    #[test]
    fn apply_on_empty_vertex_set() {
        let mir = compile_source(programs::BFS).unwrap();
        let g = Graph::unweighted(&[]);
        let mut store = initial_store(&mir, &g).unwrap();
        let before = store.clone();
        let t = run_step(&mir, &g, &mut store, 3).unwrap();
        assert_eq!((t.elements, t.edges_examined), (0, 0));
        assert_eq!(store, before);
    }

    #[test]
    fn sssp_g2() {
        let mir = compile_source(programs::SSSP).unwrap();
        let r = run(&mir, &g2(), &args()).unwrap();
        assert_eq!(ints(&r, "SP"), vec![0, 2, 3]);
    }

    #[test]
    fn cgaw_g2() {
        let mir = compile_source(programs::CGAW).unwrap();
        let r = run(&mir, &g2(), &args()).unwrap();
        assert_eq!(floats(&r, "accum"), vec![5.0, 1.0, 0.0]);
        assert_eq!(floats(&r, "attention"), vec![0.4, 0.6, 1.0]);
    }

    #[test]
    fn pagerank_two_cycle() {
        let mir = compile_source(programs::PAGERANK).unwrap();
        let r = run(&mir, &Graph::unweighted(&[(0, 1), (1, 0)]), &args()).unwrap();
        assert_eq!(floats(&r, "PR_old"), vec![0.5, 0.5]);
    }

    #[test]
    fn missing_argument() {
        let mir = compile_source(programs::BFS).unwrap();
        assert_eq!(run(&mir, &g1(), &[]).unwrap_err(), RuntimeError::MissingArgument { index: 1 });
    }

    #[test]
    fn weightedness_must_match() {
        let mir = compile_source(programs::SSSP).unwrap();
        assert!(matches!(run(&mir, &g1(), &args()), Err(RuntimeError::WeightMismatch { .. })));
    }

    const HEADER: &str = "element Vertex end\nelement Edge end\n\
        const edges: edgeset{Edge}(Vertex, Vertex) = load(argv[1]);\n\
        const vertices: vertexset{Vertex} = edges.getVertices();\n\
        const a: vector{Vertex}(int);\n";

    fn run_body(body: &str, options: RunOptions) -> Result<RunResult, RuntimeError> {
        let mir = compile_source(&format!("{HEADER}{body}")).unwrap();
        run_with_options(&mir, &g1(), &args(), options)
    }

    #[test]
    fn iteration_guard() {
        let err = run_body("func main()\n    while (1)\n    end\nend\n", RunOptions { max_iters: 50 }).unwrap_err();
        assert_eq!(err, RuntimeError::IterationLimit { limit: 50 });
    }

    #[test]
    fn runtime_errors() {
        let opts = RunOptions::default();
        let e = run_body("func main()\n    a[4] = 1;\nend\n", opts).unwrap_err();
        assert!(matches!(e, RuntimeError::IndexOutOfBounds { index: 4, len: 4, .. }));
        let e = run_body("func main()\n    var x: int = 1 / (a[0]);\nend\n", opts).unwrap_err();
        assert_eq!(e, RuntimeError::DivisionByZero);
        let e = run_body(
            "func main()\n    var x: int = 4611686018427387904;\n    x = x + x;\nend\n",
            opts,
        )
        .unwrap_err();
        assert!(matches!(e, RuntimeError::Overflow { .. }));
    }

    #[test]
    fn graph_path_is_one_indexed() {
        let mir = compile_source(programs::BFS).unwrap();
        let a = vec!["first.txt".to_string(), "second.txt".to_string()];
        assert_eq!(graph_path(&mir, &a).unwrap(), "first.txt");
    }
}
