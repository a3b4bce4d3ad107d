//! Middle-end IR: resolved, typed program with property placement and the
//! kernel schedule extracted from `main`.

use serde::Serialize;

use crate::diag::SourceSpan;
pub use crate::frontend::fir::{BinOp, ReduceOp};

pub type PropId = usize;
pub type ScalarId = usize;
pub type FuncId = usize;
pub type LocalId = usize;
pub type InvocationId = usize;
pub type LoopId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Ty {
    Int,
    Float,
    Bool,
    Vertex,
    Edge,
}

impl Ty {
    pub fn is_numeric(self) -> bool {
        matches!(self, Ty::Int | Ty::Float | Ty::Vertex | Ty::Edge)
    }

    pub fn name(self) -> &'static str {
        match self {
            Ty::Int => "int",
            Ty::Float => "float",
            Ty::Bool => "bool",
            Ty::Vertex => "Vertex",
            Ty::Edge => "Edge",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ElementKind {
    Vertex,
    Edge,
    /// A materialized single-cell device copy of a global scalar.
    Scalar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Placement {
    Host,
    Device,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Storage {
    Vector,
    ScalarCell { scalar: ScalarId },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyInfo {
    pub name: String,
    pub element_kind: ElementKind,
    pub value_type: Ty,
    pub placement: Placement,
    pub memory_unit_id: Option<u32>,
    pub channel_index: Option<u32>,
    pub storage: Storage,
    #[serde(skip)]
    pub span: SourceSpan,
}

impl PropertyInfo {
    pub fn is_vector(&self) -> bool {
        self.storage == Storage::Vector
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarInfo {
    pub name: String,
    pub ty: Ty,
    pub init: Option<Expr>,
    pub placement: Placement,
    #[serde(skip)]
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum GraphSource {
    /// `load(argv[k])`
    Argv(u32),
    /// `load("path")`
    Path(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphDecl {
    pub edgeset: String,
    pub vertexset: Option<String>,
    pub vertex_element: String,
    pub edge_element: String,
    pub weighted: bool,
    pub source: GraphSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FunctionRole {
    VertexFunction,
    EdgeFunction,
    HostFunction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ParamRole {
    /// The vertex a vertex-function is applied to.
    Vertex,
    Src,
    Dst,
    Weight,
    /// The edge ordinal an edge-function is applied to.
    Edge,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MirParam {
    pub name: String,
    pub role: ParamRole,
    pub local: LocalId,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Local {
    pub name: String,
    pub ty: Ty,
}

/// Where an indexed property access lands relative to the element a kernel
/// is applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum IndexClass {
    /// The kernel's own vertex (vertex-functions) or edge (edge-functions).
    Owned,
    Src,
    Dst,
    Neighbor,
    /// Independent of the element being processed, e.g. `[0]`.
    Invariant,
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Access {
    pub prop: PropId,
    pub index: IndexClass,
    /// Rendered index expression, used for structural comparison.
    pub index_text: String,
    pub op: Option<ReduceOp>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Effects {
    pub reads: Vec<Access>,
    pub writes: Vec<Access>,
    pub reductions: Vec<Access>,
    /// Accumulations rewritten into per-lane cells.
    pub lane_accumulations: Vec<Access>,
    pub scalar_reads: Vec<ScalarId>,
    pub scalar_writes: Vec<ScalarId>,
    pub uses_neighbors: bool,
}

impl Effects {
    pub fn reads_prop(&self, prop: PropId) -> bool {
        self.reads.iter().any(|a| a.prop == prop)
    }

    /// Properties written by plain stores, reductions or lane accumulations.
    pub fn written_props(&self) -> Vec<PropId> {
        let mut v: Vec<PropId> = self
            .writes
            .iter()
            .chain(&self.reductions)
            .chain(&self.lane_accumulations)
            .map(|a| a.prop)
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn touched_props(&self) -> Vec<PropId> {
        let mut v = self.written_props();
        v.extend(self.reads.iter().map(|a| a.prop));
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// A per-lane accumulator introduced by unroll legalization. Lane `k`
/// collects the contributions of elements whose ordinal is `k mod lanes`;
/// after the sweep the lanes are combined in ascending order and folded into
/// `prop[index]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaneSlot {
    pub prop: PropId,
    pub index: Expr,
    pub op: ReduceOp,
    pub ty: Ty,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MirFunction {
    pub name: String,
    pub role: FunctionRole,
    pub params: Vec<MirParam>,
    pub locals: Vec<Local>,
    pub body: Vec<Stmt>,
    pub effects: Effects,
    pub lanes: u32,
    pub lane_slots: Vec<LaneSlot>,
    #[serde(skip)]
    pub span: SourceSpan,
}

impl MirFunction {
    pub fn param(&self, role: ParamRole) -> Option<&MirParam> {
        self.params.iter().find(|p| p.role == role)
    }

    pub fn param_role_of(&self, local: LocalId) -> Option<ParamRole> {
        self.params.iter().find(|p| p.local == local).map(|p| p.role)
    }

    pub fn is_weighted(&self) -> bool {
        self.param(ParamRole::Weight).is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SetKind {
    Vertices,
    Edges,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Operator {
    Init,
    Process,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ProcessingModel {
    #[serde(rename = "ECP")]
    Ecp,
    #[serde(rename = "VCP-traversal")]
    VcpTraversal,
    #[serde(rename = "VCP-apply")]
    VcpApply,
}

impl ProcessingModel {
    pub fn label(self) -> &'static str {
        match self {
            ProcessingModel::Ecp => "ECP",
            ProcessingModel::VcpTraversal => "VCP-traversal",
            ProcessingModel::VcpApply => "VCP-apply",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum UpdateStreamClass {
    Sequential,
    Unordered,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Invocation {
    pub id: InvocationId,
    pub set: SetKind,
    pub op: Operator,
    pub function: FuncId,
    /// Set for `process` invocations.
    pub model: Option<ProcessingModel>,
    /// Set by update-stream classification.
    pub stream: Option<UpdateStreamClass>,
    #[serde(skip)]
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Expr {
    pub kind: ExprKind,
    pub ty: Ty,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ExprKind {
    Int(i64),
    Float(f64),
    Bool(bool),
    Local(LocalId),
    Scalar(ScalarId),
    Prop { prop: PropId, index: Box<Expr> },
    SetSize(SetKind),
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Neg(Box<Expr>),
    ToFloat(Box<Expr>),
    /// Integer used as a condition: non-zero is true.
    Truthy(Box<Expr>),
}

impl Expr {
    pub fn new(kind: ExprKind, ty: Ty) -> Self {
        Expr { kind, ty }
    }

    pub fn int(v: i64) -> Self {
        Expr::new(ExprKind::Int(v), Ty::Int)
    }

    pub fn local(id: LocalId, ty: Ty) -> Self {
        Expr::new(ExprKind::Local(id), ty)
    }

    pub fn prop(prop: PropId, index: Expr, ty: Ty) -> Self {
        Expr::new(ExprKind::Prop { prop, index: Box::new(index) }, ty)
    }

    /// Calls `f` on this expression and every sub-expression, pre-order.
    pub fn visit(&self, f: &mut dyn FnMut(&Expr)) {
        f(self);
        match &self.kind {
            ExprKind::Prop { index, .. } => index.visit(f),
            ExprKind::Binary { lhs, rhs, .. } => {
                lhs.visit(f);
                rhs.visit(f);
            }
            ExprKind::Neg(e) | ExprKind::ToFloat(e) | ExprKind::Truthy(e) => e.visit(f),
            _ => {}
        }
    }

    pub fn visit_mut(&mut self, f: &mut dyn FnMut(&mut Expr)) {
        f(self);
        match &mut self.kind {
            ExprKind::Prop { index, .. } => index.visit_mut(f),
            ExprKind::Binary { lhs, rhs, .. } => {
                lhs.visit_mut(f);
                rhs.visit_mut(f);
            }
            ExprKind::Neg(e) | ExprKind::ToFloat(e) | ExprKind::Truthy(e) => e.visit_mut(f),
            _ => {}
        }
    }

    pub fn mentions_local(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| found |= matches!(e.kind, ExprKind::Local(_)));
        found
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stmt {
    pub kind: StmtKind,
    #[serde(skip)]
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum StmtKind {
    Assign { local: LocalId, value: Expr },
    SetScalar { scalar: ScalarId, value: Expr },
    Store { prop: PropId, index: Expr, value: Expr },
    Reduce { prop: PropId, index: Expr, op: ReduceOp, value: Expr },
    LaneAccumulate { slot: usize, value: Expr },
    If { cond: Expr, then_body: Vec<Stmt>, else_body: Vec<Stmt> },
    While { id: LoopId, cond: Expr, body: Vec<Stmt> },
    ForNeighbors { var: LocalId, vertex: Expr, body: Vec<Stmt> },
    Invoke(InvocationId),
}

impl Stmt {
    pub fn new(kind: StmtKind, span: SourceSpan) -> Self {
        Stmt { kind, span }
    }
}

/// Calls `f` on every statement in `stmts`, recursing into nested blocks.
pub fn walk_stmts<'a>(stmts: &'a [Stmt], f: &mut dyn FnMut(&'a Stmt)) {
    for s in stmts {
        f(s);
        match &s.kind {
            StmtKind::If { then_body, else_body, .. } => {
                walk_stmts(then_body, f);
                walk_stmts(else_body, f);
            }
            StmtKind::While { body, .. } | StmtKind::ForNeighbors { body, .. } => walk_stmts(body, f),
            _ => {}
        }
    }
}

pub fn walk_stmts_mut(stmts: &mut [Stmt], f: &mut dyn FnMut(&mut Stmt)) {
    for s in stmts {
        f(s);
        match &mut s.kind {
            StmtKind::If { then_body, else_body, .. } => {
                walk_stmts_mut(then_body, f);
                walk_stmts_mut(else_body, f);
            }
            StmtKind::While { body, .. } | StmtKind::ForNeighbors { body, .. } => walk_stmts_mut(body, f),
            _ => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MirProgram {
    pub graph: GraphDecl,
    pub properties: Vec<PropertyInfo>,
    pub scalars: Vec<ScalarInfo>,
    pub functions: Vec<MirFunction>,
    /// The host function; its body is the control skeleton around invocations.
    pub main: MirFunction,
    pub schedule: Vec<Invocation>,
    pub channels: u32,
    /// Number of `while` loops in the program (loop ids are dense).
    pub loop_count: usize,
}

impl MirProgram {
    pub fn property_id(&self, name: &str) -> Option<PropId> {
        self.properties.iter().position(|p| p.name == name)
    }

    pub fn property(&self, name: &str) -> Option<&PropertyInfo> {
        self.properties.iter().find(|p| p.name == name)
    }

    pub fn scalar_id(&self, name: &str) -> Option<ScalarId> {
        self.scalars.iter().position(|s| s.name == name)
    }

    pub fn function_id(&self, name: &str) -> Option<FuncId> {
        self.functions.iter().position(|f| f.name == name)
    }

    pub fn function(&self, name: &str) -> Option<&MirFunction> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn process_invocations(&self) -> impl Iterator<Item = &Invocation> {
        self.schedule.iter().filter(|i| i.op == Operator::Process)
    }

    /// Vector properties declared by the program, in declaration order.
    pub fn vector_properties(&self) -> impl Iterator<Item = (PropId, &PropertyInfo)> {
        self.properties.iter().enumerate().filter(|(_, p)| p.is_vector())
    }

    /// Functions invoked by at least one `process`.
    pub fn device_functions(&self) -> Vec<FuncId> {
        let mut v: Vec<FuncId> = self.process_invocations().map(|i| i.function).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}
