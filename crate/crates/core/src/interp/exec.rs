//! Element-level execution shared by the interpreter and the simulator.

use super::store::PropertyStore;
use super::value::{binary, negate, reduce, Value};
use super::RuntimeError;
use crate::graphio::{CsrGraph, Graph};
use crate::sema::*;

/// Everything execution needs besides the mutable store.
#[derive(Clone, Copy)]
pub struct Program<'a> {
    pub mir: &'a MirProgram,
    pub graph: &'a Graph,
    pub csr: &'a CsrGraph,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Element {
    Vertex(usize),
    /// File ordinal of the edge.
    Edge(usize),
}

impl Element {
    pub fn ordinal(self) -> usize {
        match self {
            Element::Vertex(v) | Element::Edge(v) => v,
        }
    }
}

/// Memory-access hooks. `owned` is true when the index is the element the
/// kernel is applied to.
pub trait Observer {
    fn read(&mut self, _prop: PropId, _index: usize, _owned: bool) {}
    fn write(&mut self, _prop: PropId, _index: usize, _owned: bool, _op: Option<ReduceOp>) {}
    /// Offered each non-owned reduction after `write`. Returning true takes
    /// the update over and the store is left untouched.
    fn capture(&mut self, _prop: PropId, _index: usize, _op: ReduceOp, _value: Value) -> bool {
        false
    }
}

pub struct NoObserver;

impl Observer for NoObserver {}

struct Frame<'f> {
    func: Option<&'f MirFunction>,
    locals: Vec<Value>,
    element: Option<Element>,
}

/// Per-lane accumulator cells of one kernel sweep, `cells[slot][lane]`.
#[derive(Debug, Clone)]
pub struct LaneCells {
    cells: Vec<Vec<Option<Value>>>,
}

impl LaneCells {
    pub fn new(func: &MirFunction) -> Self {
        LaneCells { cells: func.lane_slots.iter().map(|_| vec![None; func.lanes.max(1) as usize]).collect() }
    }
}

/// Outcome of running one element.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ElementRun {
    pub neighbors: usize,
}

fn element_index(p: &Program, store: &PropertyStore, prop: PropId, index: Value) -> Result<usize, RuntimeError> {
    let len = store.values[prop].len();
    let i = index.as_int();
    if i < 0 || i as usize >= len {
        return Err(RuntimeError::IndexOutOfBounds { property: p.mir.properties[prop].name.clone(), index: i, len });
    }
    Ok(i as usize)
}

fn is_owned(p: &Program, prop: PropId, index: usize, element: Option<Element>) -> bool {
    match (element, p.mir.properties[prop].element_kind) {
        (Some(Element::Vertex(v)), ElementKind::Vertex) => v == index,
        (Some(Element::Edge(e)), ElementKind::Edge) => e == index,
        _ => false,
    }
}

fn eval(p: &Program, store: &PropertyStore, frame: &Frame, e: &Expr, obs: &mut dyn Observer) -> Result<Value, RuntimeError> {
    Ok(match &e.kind {
        ExprKind::Int(v) => Value::Int(*v),
        ExprKind::Float(v) => Value::Float(*v),
        ExprKind::Bool(b) => Value::Bool(*b),
        ExprKind::Local(l) => frame.locals[*l],
        ExprKind::Scalar(s) => store.scalars[*s],
        ExprKind::Prop { prop, index } => {
            let iv = eval(p, store, frame, index, obs)?;
            let i = element_index(p, store, *prop, iv)?;
            obs.read(*prop, i, is_owned(p, *prop, i, frame.element));
            store.values[*prop][i]
        }
        ExprKind::SetSize(SetKind::Vertices) => Value::Int(p.graph.vertex_count as i64),
        ExprKind::SetSize(SetKind::Edges) => Value::Int(p.graph.edge_count() as i64),
        ExprKind::Binary { op, lhs, rhs } => {
            let l = eval(p, store, frame, lhs, obs)?;
            let r = eval(p, store, frame, rhs, obs)?;
            binary(*op, l, r)?
        }
        ExprKind::Neg(inner) => negate(eval(p, store, frame, inner, obs)?)?,
        ExprKind::ToFloat(inner) => Value::Float(eval(p, store, frame, inner, obs)?.as_float()),
        ExprKind::Truthy(inner) => Value::Bool(eval(p, store, frame, inner, obs)?.as_bool()),
    })
}

/// Evaluates an expression outside any kernel (scalar initializers, lane indices).
pub fn eval_host(p: &Program, store: &PropertyStore, e: &Expr) -> Result<Value, RuntimeError> {
    let frame = Frame { func: None, locals: vec![], element: None };
    eval(p, store, &frame, e, &mut NoObserver)
}

/// Host-side callbacks for statements only `main` contains.
pub trait HostHooks {
    fn invoke(&mut self, store: &mut PropertyStore, id: InvocationId) -> Result<(), RuntimeError>;
    fn loop_iteration(&mut self, id: LoopId, count: u64) -> Result<(), RuntimeError>;
}

struct Ctx<'c, 'a> {
    p: &'c Program<'a>,
    obs: &'c mut dyn Observer,
    lanes: Option<&'c mut LaneCells>,
    host: Option<&'c mut dyn HostHooks>,
    neighbors: usize,
}

fn exec_block(ctx: &mut Ctx, store: &mut PropertyStore, frame: &mut Frame, stmts: &[Stmt]) -> Result<(), RuntimeError> {
    for s in stmts {
        exec_stmt(ctx, store, frame, s)?;
    }
    Ok(())
}

fn exec_stmt(ctx: &mut Ctx, store: &mut PropertyStore, frame: &mut Frame, s: &Stmt) -> Result<(), RuntimeError> {
    let p = ctx.p;
    match &s.kind {
        StmtKind::Assign { local, value } => {
            frame.locals[*local] = eval(p, store, frame, value, ctx.obs)?;
        }
        StmtKind::SetScalar { scalar, value } => {
            store.scalars[*scalar] = eval(p, store, frame, value, ctx.obs)?;
        }
        StmtKind::Store { prop, index, value } => {
            let iv = eval(p, store, frame, index, ctx.obs)?;
            let v = eval(p, store, frame, value, ctx.obs)?;
            let i = element_index(p, store, *prop, iv)?;
            ctx.obs.write(*prop, i, is_owned(p, *prop, i, frame.element), None);
            store.values[*prop][i] = v;
        }
        StmtKind::Reduce { prop, index, op, value } => {
            let iv = eval(p, store, frame, index, ctx.obs)?;
            let v = eval(p, store, frame, value, ctx.obs)?;
            let i = element_index(p, store, *prop, iv)?;
            let owned = is_owned(p, *prop, i, frame.element);
            ctx.obs.write(*prop, i, owned, Some(*op));
            if !owned && ctx.obs.capture(*prop, i, *op, v) {
                return Ok(());
            }
            store.values[*prop][i] = reduce(*op, store.values[*prop][i], v)?;
        }
        StmtKind::LaneAccumulate { slot, value } => {
            let v = eval(p, store, frame, value, ctx.obs)?;
            let func = frame.func.expect("lane accumulation outside a kernel");
            let lane = frame.element.map(|e| e.ordinal()).unwrap_or(0) % func.lanes.max(1) as usize;
            let op = func.lane_slots[*slot].op;
            let cells = ctx.lanes.as_deref_mut().expect("lane cells not allocated");
            let cell = &mut cells.cells[*slot][lane];
            *cell = Some(match *cell {
                None => v,
                Some(old) => reduce(op, old, v)?,
            });
        }
        StmtKind::If { cond, then_body, else_body } => {
            if eval(p, store, frame, cond, ctx.obs)?.as_bool() {
                exec_block(ctx, store, frame, then_body)?;
            } else {
                exec_block(ctx, store, frame, else_body)?;
            }
        }
        StmtKind::While { id, cond, body } => {
            let mut count = 0u64;
            while eval(p, store, frame, cond, ctx.obs)?.as_bool() {
                count += 1;
                if let Some(h) = ctx.host.as_deref_mut() {
                    h.loop_iteration(*id, count)?;
                }
                exec_block(ctx, store, frame, body)?;
            }
        }
        StmtKind::ForNeighbors { var, vertex, body } => {
            let v = eval(p, store, frame, vertex, ctx.obs)?.as_int() as usize;
            for k in p.csr.offsets[v]..p.csr.offsets[v + 1] {
                ctx.neighbors += 1;
                frame.locals[*var] = Value::Int(p.csr.columns[k] as i64);
                exec_block(ctx, store, frame, body)?;
            }
        }
        StmtKind::Invoke(id) => {
            let h = ctx.host.as_deref_mut().expect("invocation outside main");
            h.invoke(store, *id)?;
        }
    }
    Ok(())
}

/// Runs `func` on one element.
pub fn run_element(
    p: &Program,
    store: &mut PropertyStore,
    func: &MirFunction,
    element: Element,
    lanes: &mut LaneCells,
    obs: &mut dyn Observer,
) -> Result<ElementRun, RuntimeError> {
    let mut locals: Vec<Value> = func.locals.iter().map(|l| Value::default_for(l.ty)).collect();
    for param in &func.params {
        locals[param.local] = match (param.role, element) {
            (ParamRole::Vertex, Element::Vertex(v)) => Value::Int(v as i64),
            (ParamRole::Src, Element::Edge(e)) => Value::Int(p.graph.edges[e].src as i64),
            (ParamRole::Dst, Element::Edge(e)) => Value::Int(p.graph.edges[e].dst as i64),
            (ParamRole::Weight, Element::Edge(e)) => Value::Int(p.graph.edges[e].weight),
            (ParamRole::Edge, Element::Edge(e)) => Value::Int(e as i64),
            _ => unreachable!("parameter role does not match the element kind"),
        };
    }
    let mut frame = Frame { func: Some(func), locals, element: Some(element) };
    let mut ctx = Ctx { p, obs, lanes: Some(lanes), host: None, neighbors: 0 };
    exec_block(&mut ctx, store, &mut frame, &func.body)?;
    Ok(ElementRun { neighbors: ctx.neighbors })
}

/// Folds the lane cells of a finished sweep into their target properties,
/// combining lanes in ascending order. Returns the indices written.
pub fn finish_lanes(
    p: &Program,
    store: &mut PropertyStore,
    func: &MirFunction,
    lanes: LaneCells,
) -> Result<Vec<(PropId, usize)>, RuntimeError> {
    let mut written = Vec::new();
    for (slot, cells) in func.lane_slots.iter().zip(lanes.cells) {
        let mut acc: Option<Value> = None;
        for v in cells.into_iter().flatten() {
            acc = Some(match acc {
                None => v,
                Some(a) => reduce(slot.op, a, v)?,
            });
        }
        if let Some(acc) = acc {
            let iv = eval_host(p, store, &slot.index)?;
            let i = element_index(p, store, slot.prop, iv)?;
            store.values[slot.prop][i] = reduce(slot.op, store.values[slot.prop][i], acc)?;
            written.push((slot.prop, i));
        }
    }
    Ok(written)
}

/// Executes `main`, delegating invocations and loop accounting to `hooks`.
pub fn run_main(p: &Program, store: &mut PropertyStore, hooks: &mut dyn HostHooks) -> Result<(), RuntimeError> {
    let main = &p.mir.main;
    let mut frame = Frame {
        func: Some(main),
        locals: main.locals.iter().map(|l| Value::default_for(l.ty)).collect(),
        element: None,
    };
    let mut obs = NoObserver;
    let mut ctx = Ctx { p, obs: &mut obs, lanes: None, host: Some(hooks), neighbors: 0 };
    exec_block(&mut ctx, store, &mut frame, &main.body)
}
