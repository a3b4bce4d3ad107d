//! FIR to MIR: name resolution, typing, role checking and schedule extraction.

use std::collections::HashMap;

use super::effects::refresh_effects;
use super::mir::*;
use super::placement::detect_properties;
use crate::diag::{Diagnostic, SourceSpan};
use crate::frontend::fir::{self, Decl, FirProgram, TypeExpr};

type SResult<T> = Result<T, Diagnostic>;

pub const DEFAULT_CHANNELS: u32 = 32;

/// Analyzes `fir` and places properties over the default channel count.
pub fn analyze(fir: &FirProgram) -> SResult<MirProgram> {
    analyze_with_channels(fir, DEFAULT_CHANNELS)
}

pub fn analyze_with_channels(fir: &FirProgram, channels: u32) -> SResult<MirProgram> {
    let mut mir = Analyzer::default().run(fir)?;
    refresh_effects(&mut mir);
    check_kernel_effects(&mir)?;
    Ok(detect_properties(mir, channels))
}

/// Maps a process invocation to its processing model.
pub fn infer_model(set: SetKind, op: Operator, function: &MirFunction) -> Option<ProcessingModel> {
    match (op, set) {
        (Operator::Init, _) => None,
        (Operator::Process, SetKind::Edges) => Some(ProcessingModel::Ecp),
        (Operator::Process, SetKind::Vertices) if uses_neighbors(function) => Some(ProcessingModel::VcpTraversal),
        (Operator::Process, SetKind::Vertices) => Some(ProcessingModel::VcpApply),
    }
}

fn uses_neighbors(f: &MirFunction) -> bool {
    let mut found = false;
    walk_stmts(&f.body, &mut |s| found |= matches!(s.kind, StmtKind::ForNeighbors { .. }));
    found
}

#[derive(Debug, Clone)]
enum Global {
    Element,
    EdgeSet,
    VertexSet,
    Property(PropId),
    Scalar(ScalarId),
    Function(FuncId),
    Main,
}

#[derive(Default)]
struct Analyzer {
    globals: HashMap<String, Global>,
    element_kinds: HashMap<String, ElementKind>,
    graph: Option<GraphDecl>,
    properties: Vec<PropertyInfo>,
    scalars: Vec<ScalarInfo>,
    functions: Vec<MirFunction>,
    schedule: Vec<Invocation>,
    loop_count: usize,
}

struct FnCtx {
    func: MirFunction,
    scope: HashMap<String, LocalId>,
    for_depth: usize,
}

impl FnCtx {
    fn is_host(&self) -> bool {
        self.func.role == FunctionRole::HostFunction
    }
}

fn err<T>(span: SourceSpan, msg: impl Into<String>) -> SResult<T> {
    Err(Diagnostic::error(span, msg))
}

impl Analyzer {
    fn run(mut self, fir: &FirProgram) -> SResult<MirProgram> {
        self.collect_elements(fir)?;
        let mut main_decl = None;
        // Functions get ids up front so `main` can reference any of them.
        let mut func_decls = Vec::new();
        for d in &fir.declarations {
            if let Decl::Func(f) = d {
                if self.globals.contains_key(&f.name) {
                    return err(f.span, format!("`{}` is already declared", f.name));
                }
                if f.name == "main" {
                    self.globals.insert(f.name.clone(), Global::Main);
                    main_decl = Some(f);
                } else {
                    self.globals.insert(f.name.clone(), Global::Function(func_decls.len()));
                    func_decls.push(f);
                }
            }
        }
        for d in &fir.declarations {
            match d {
                Decl::Element(_) | Decl::Func(_) => {}
                Decl::Const(c) => self.const_decl(c)?,
            }
        }
        if self.graph.is_none() {
            let span = fir.declarations.first().map(|d| d.span()).unwrap_or_default();
            return err(span, "program declares no edgeset");
        }
        for f in &func_decls {
            let mf = self.kernel_function(f)?;
            self.functions.push(mf);
        }
        let Some(main_decl) = main_decl else {
            let span = fir.declarations.last().map(|d| d.span()).unwrap_or_default();
            return err(span, "program has no `main` function");
        };
        if !main_decl.params.is_empty() {
            return err(main_decl.span, "`main` takes no parameters");
        }
        let main = self.function_body(
            main_decl,
            MirFunction {
                name: "main".into(),
                role: FunctionRole::HostFunction,
                params: vec![],
                locals: vec![],
                body: vec![],
                effects: Effects::default(),
                lanes: 1,
                lane_slots: vec![],
                span: main_decl.span,
            },
        )?;
        Ok(MirProgram {
            graph: self.graph.unwrap(),
            properties: self.properties,
            scalars: self.scalars,
            functions: self.functions,
            main,
            schedule: self.schedule,
            channels: DEFAULT_CHANNELS,
            loop_count: self.loop_count,
        })
    }

    fn collect_elements(&mut self, fir: &FirProgram) -> SResult<()> {
        for d in &fir.declarations {
            if let Decl::Element(e) = d {
                if self.globals.contains_key(&e.name) {
                    return err(e.span, format!("`{}` is already declared", e.name));
                }
                self.globals.insert(e.name.clone(), Global::Element);
            }
        }
        // Element kinds come from how the sets use them.
        for d in &fir.declarations {
            let Decl::Const(c) = d else { continue };
            match &c.ty {
                TypeExpr::EdgeSet { element, src, dst, .. } => {
                    for name in [element, src, dst] {
                        self.require_element(name, c.span)?;
                    }
                    if src != dst {
                        return err(c.span, "edgeset endpoints must have the same element type");
                    }
                    self.set_kind(element, ElementKind::Edge, c.span)?;
                    self.set_kind(src, ElementKind::Vertex, c.span)?;
                }
                TypeExpr::VertexSet { element } => {
                    self.require_element(element, c.span)?;
                    self.set_kind(element, ElementKind::Vertex, c.span)?;
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn require_element(&self, name: &str, span: SourceSpan) -> SResult<()> {
        match self.globals.get(name) {
            Some(Global::Element) => Ok(()),
            _ => err(span, format!("undefined element type `{name}`")),
        }
    }

    fn set_kind(&mut self, name: &str, kind: ElementKind, span: SourceSpan) -> SResult<()> {
        match self.element_kinds.get(name) {
            Some(k) if *k != kind => err(span, format!("element `{name}` is used both as a vertex and as an edge type")),
            _ => {
                self.element_kinds.insert(name.to_string(), kind);
                Ok(())
            }
        }
    }

    fn element_ty(&self, name: &str, span: SourceSpan) -> SResult<Ty> {
        match self.globals.get(name) {
            Some(Global::Element) => match self.element_kinds.get(name) {
                Some(ElementKind::Edge) => Ok(Ty::Edge),
                Some(_) => Ok(Ty::Vertex),
                None => err(span, format!("element `{name}` is not used by any vertexset or edgeset")),
            },
            _ => err(span, format!("undefined type `{name}`")),
        }
    }

    fn scalar_ty(&self, t: &TypeExpr, span: SourceSpan) -> SResult<Ty> {
        match t {
            TypeExpr::Int => Ok(Ty::Int),
            TypeExpr::Float => Ok(Ty::Float),
            TypeExpr::Bool => Ok(Ty::Bool),
            TypeExpr::Named(n) => self.element_ty(n, span),
            _ => err(span, "expected a scalar or element type"),
        }
    }

    fn const_decl(&mut self, c: &fir::ConstDecl) -> SResult<()> {
        if self.globals.contains_key(&c.name) {
            return err(c.span, format!("`{}` is already declared", c.name));
        }
        match &c.ty {
            TypeExpr::EdgeSet { element, src, weight, .. } => {
                if self.graph.is_some() {
                    return err(c.span, "only one edgeset may be declared");
                }
                let weighted = match weight.as_deref() {
                    None => false,
                    Some(TypeExpr::Int) => true,
                    Some(_) => return err(c.span, "edge weights must be `int`"),
                };
                let source = self.load_source(c)?;
                self.graph = Some(GraphDecl {
                    edgeset: c.name.clone(),
                    vertexset: None,
                    vertex_element: src.clone(),
                    edge_element: element.clone(),
                    weighted,
                    source,
                });
                self.globals.insert(c.name.clone(), Global::EdgeSet);
            }
            TypeExpr::VertexSet { element } => {
                let Some(graph) = self.graph.as_mut() else {
                    return err(c.span, "a vertexset must be declared after the edgeset it is taken from");
                };
                if graph.vertexset.is_some() {
                    return err(c.span, "only one vertexset may be declared");
                }
                if *element != graph.vertex_element {
                    return err(c.span, format!("vertexset element `{element}` does not match the edgeset's vertex type"));
                }
                let ok = match c.init.as_ref().map(|e| &e.unparen().kind) {
                    Some(fir::ExprKind::MethodCall { receiver, name, args }) => {
                        name == "getVertices"
                            && args.is_empty()
                            && matches!(&receiver.kind, fir::ExprKind::Ident(r) if *r == graph.edgeset)
                    }
                    _ => false,
                };
                if !ok {
                    return err(c.span, format!("vertexset must be initialized with `{}.getVertices()`", graph.edgeset));
                }
                graph.vertexset = Some(c.name.clone());
                self.globals.insert(c.name.clone(), Global::VertexSet);
            }
            TypeExpr::Vector { element, value } => {
                if c.init.is_some() {
                    return err(c.span, "vector properties cannot have an initializer");
                }
                let kind = match self.element_ty(element, c.span)? {
                    Ty::Edge => ElementKind::Edge,
                    _ => ElementKind::Vertex,
                };
                let value_type = match value.as_ref() {
                    TypeExpr::Int => Ty::Int,
                    TypeExpr::Float => Ty::Float,
                    TypeExpr::Bool => Ty::Bool,
                    _ => return err(c.span, "property values must be `int`, `float` or `bool`"),
                };
                self.globals.insert(c.name.clone(), Global::Property(self.properties.len()));
                self.properties.push(PropertyInfo {
                    name: c.name.clone(),
                    element_kind: kind,
                    value_type,
                    placement: Placement::Device,
                    memory_unit_id: None,
                    channel_index: None,
                    storage: Storage::Vector,
                    span: c.span,
                });
            }
            TypeExpr::Int | TypeExpr::Float | TypeExpr::Bool => {
                let ty = self.scalar_ty(&c.ty, c.span)?;
                let init = match &c.init {
                    Some(e) => {
                        let mut ctx = FnCtx {
                            func: MirFunction {
                                name: "<global>".into(),
                                role: FunctionRole::HostFunction,
                                params: vec![],
                                locals: vec![],
                                body: vec![],
                                effects: Effects::default(),
                                lanes: 1,
                                lane_slots: vec![],
                                span: c.span,
                            },
                            scope: HashMap::new(),
                            for_depth: 0,
                        };
                        let v = self.expr(&mut ctx, e)?;
                        Some(coerce(v, ty, e.span)?)
                    }
                    None => None,
                };
                self.globals.insert(c.name.clone(), Global::Scalar(self.scalars.len()));
                self.scalars.push(ScalarInfo { name: c.name.clone(), ty, init, placement: Placement::Host, span: c.span });
            }
            TypeExpr::Named(_) => return err(c.span, "global element-typed constants are not supported"),
        }
        Ok(())
    }

    fn load_source(&self, c: &fir::ConstDecl) -> SResult<GraphSource> {
        let Some(init) = &c.init else {
            return err(c.span, "an edgeset must be initialized with `load(...)`");
        };
        let fir::ExprKind::Call { name, args } = &init.unparen().kind else {
            return err(init.span, "an edgeset must be initialized with `load(...)`");
        };
        if name != "load" || args.len() != 1 {
            return err(init.span, "an edgeset must be initialized with `load(...)`");
        }
        match &args[0].unparen().kind {
            fir::ExprKind::Str(path) => Ok(GraphSource::Path(path.clone())),
            fir::ExprKind::Index { name, index } if name == "argv" => match index.unparen().kind {
                fir::ExprKind::Int(k) if k >= 0 && k <= u32::MAX as i64 => Ok(GraphSource::Argv(k as u32)),
                _ => err(index.span, "argv index must be a non-negative integer literal"),
            },
            _ => err(args[0].span, "`load` expects `argv[k]` or a string literal"),
        }
    }

    fn kernel_function(&mut self, f: &fir::FuncDecl) -> SResult<MirFunction> {
        let mut locals = Vec::new();
        let mut tys = Vec::new();
        for p in &f.params {
            let ty = self.scalar_ty(&p.ty, p.span)?;
            tys.push(ty);
            locals.push(Local { name: p.name.clone(), ty });
        }
        let bad = || {
            err(
                f.span,
                format!(
                    "function `{}` must take (v: Vertex) or (src: Vertex, dst: Vertex[, weight: int][, e: Edge])",
                    f.name
                ),
            )
        };
        let roles: Vec<ParamRole> = match tys.as_slice() {
            [Ty::Vertex] => vec![ParamRole::Vertex],
            [Ty::Vertex, Ty::Vertex] => vec![ParamRole::Src, ParamRole::Dst],
            [Ty::Vertex, Ty::Vertex, Ty::Int] => vec![ParamRole::Src, ParamRole::Dst, ParamRole::Weight],
            [Ty::Vertex, Ty::Vertex, Ty::Edge] => vec![ParamRole::Src, ParamRole::Dst, ParamRole::Edge],
            [Ty::Vertex, Ty::Vertex, Ty::Int, Ty::Edge] => {
                vec![ParamRole::Src, ParamRole::Dst, ParamRole::Weight, ParamRole::Edge]
            }
            _ => return bad(),
        };
        let role = if roles.len() == 1 { FunctionRole::VertexFunction } else { FunctionRole::EdgeFunction };
        let params = f
            .params
            .iter()
            .zip(&roles)
            .enumerate()
            .map(|(i, (p, r))| MirParam { name: p.name.clone(), role: *r, local: i })
            .collect();
        let func = MirFunction {
            name: f.name.clone(),
            role,
            params,
            locals,
            body: vec![],
            effects: Effects::default(),
            lanes: 1,
            lane_slots: vec![],
            span: f.span,
        };
        self.function_body(f, func)
    }

    fn function_body(&mut self, f: &fir::FuncDecl, func: MirFunction) -> SResult<MirFunction> {
        let mut scope = HashMap::new();
        for (i, l) in func.locals.iter().enumerate() {
            if scope.insert(l.name.clone(), i).is_some() {
                return err(f.span, format!("duplicate parameter `{}`", l.name));
            }
            if self.globals.contains_key(&l.name) {
                return err(f.span, format!("parameter `{}` shadows a global declaration", l.name));
            }
        }
        let mut ctx = FnCtx { func, scope, for_depth: 0 };
        let body = self.block(&mut ctx, &f.body)?;
        ctx.func.body = body;
        Ok(ctx.func)
    }

    fn block(&mut self, ctx: &mut FnCtx, stmts: &[fir::Stmt]) -> SResult<Vec<Stmt>> {
        stmts.iter().map(|s| self.stmt(ctx, s)).collect()
    }

    fn declare_local(&mut self, ctx: &mut FnCtx, name: &str, ty: Ty, span: SourceSpan) -> SResult<LocalId> {
        if ctx.scope.contains_key(name) || self.globals.contains_key(name) {
            return err(span, format!("`{name}` is already declared"));
        }
        let id = ctx.func.locals.len();
        ctx.func.locals.push(Local { name: name.to_string(), ty });
        ctx.scope.insert(name.to_string(), id);
        Ok(id)
    }

    fn stmt(&mut self, ctx: &mut FnCtx, s: &fir::Stmt) -> SResult<Stmt> {
        use fir::StmtKind as F;
        let span = s.span;
        let kind = match &s.kind {
            F::VarDecl { name, ty, init } => {
                let ty = self.scalar_ty(ty, span)?;
                let value = match init {
                    Some(e) => {
                        let v = self.expr(ctx, e)?;
                        coerce(v, ty, e.span)?
                    }
                    None => default_value(ty),
                };
                let local = self.declare_local(ctx, name, ty, span)?;
                StmtKind::Assign { local, value }
            }
            F::Assign { target, value } => {
                let v = self.expr(ctx, value)?;
                match target {
                    fir::LValue::Name { name, span } => self.assign_name(ctx, name, v, *span)?,
                    fir::LValue::Index { name, index, span } => {
                        let prop = self.indexable_property(name, *span, false)?;
                        let index = self.index_expr(ctx, prop, index)?;
                        let value = coerce(v, self.properties[prop].value_type, value.span)?;
                        StmtKind::Store { prop, index, value }
                    }
                }
            }
            F::Reduce { name, index, op, value } => {
                let prop = self.indexable_property(name, span, true)?;
                let index = self.index_expr(ctx, prop, index)?;
                let pty = self.properties[prop].value_type;
                if pty == Ty::Bool {
                    return err(span, format!("reduction `{}` is not defined on bool property `{name}`", op.symbol()));
                }
                let v = self.expr(ctx, value)?;
                let value = coerce(v, pty, value.span)?;
                StmtKind::Reduce { prop, index, op: *op, value }
            }
            F::CompoundAssign { name, value } => {
                let v = self.expr(ctx, value)?;
                let current = match (ctx.scope.get(name), self.globals.get(name)) {
                    (Some(&id), _) => Expr::local(id, ctx.func.locals[id].ty),
                    (None, Some(Global::Scalar(sid))) => {
                        if !ctx.is_host() {
                            return err(
                                span,
                                format!("reduction on scalar `{name}` inside a device kernel; declare it as a vector property"),
                            );
                        }
                        Expr::new(ExprKind::Scalar(*sid), self.scalars[*sid].ty)
                    }
                    (None, Some(Global::Property(_))) => {
                        return err(span, format!("property `{name}` must be indexed"))
                    }
                    _ => return err(span, format!("undefined identifier `{name}`")),
                };
                let sum = arith(fir::BinOp::Add, current, v, span)?;
                self.assign_name(ctx, name, sum, span)?
            }
            F::If { cond, then_body, else_body } => {
                let c = self.expr(ctx, cond)?;
                let cond = condition(c, cond.span)?;
                let then_body = self.block(ctx, then_body)?;
                let else_body = match else_body {
                    Some(b) => self.block(ctx, b)?,
                    None => vec![],
                };
                StmtKind::If { cond, then_body, else_body }
            }
            F::While { cond, body } => {
                let c = self.expr(ctx, cond)?;
                let cond = condition(c, cond.span)?;
                let id = self.loop_count;
                self.loop_count += 1;
                let body = self.block(ctx, body)?;
                StmtKind::While { id, cond, body }
            }
            F::ForIn { var, iter, body } => {
                let fir::ExprKind::MethodCall { receiver, name, args } = &iter.unparen().kind else {
                    return err(iter.span, "for loops iterate over `v.getNeighbors()`");
                };
                if name != "getNeighbors" || !args.is_empty() {
                    return err(iter.span, "for loops iterate over `v.getNeighbors()`");
                }
                if ctx.func.role != FunctionRole::VertexFunction {
                    return err(iter.span, "`getNeighbors` used outside a vertex function");
                }
                let vertex = self.expr(ctx, receiver)?;
                let owned = ctx.func.param(ParamRole::Vertex).map(|p| p.local);
                if !matches!(vertex.kind, ExprKind::Local(l) if Some(l) == owned) {
                    return err(receiver.span, "`getNeighbors` must be called on the function's vertex parameter");
                }
                if ctx.for_depth > 0 {
                    return err(span, "neighbor loops cannot be nested");
                }
                let var = self.declare_local(ctx, var, Ty::Vertex, span)?;
                ctx.for_depth += 1;
                let body = self.block(ctx, body)?;
                ctx.for_depth -= 1;
                // Loop variables are scoped to the loop body.
                let name = ctx.func.locals[var].name.clone();
                ctx.scope.remove(&name);
                StmtKind::ForNeighbors { var, vertex, body }
            }
            F::Expr(e) => self.invocation(ctx, e)?,
        };
        Ok(Stmt::new(kind, span))
    }

    fn assign_name(&mut self, ctx: &mut FnCtx, name: &str, v: Expr, span: SourceSpan) -> SResult<StmtKind> {
        if let Some(&id) = ctx.scope.get(name) {
            if ctx.func.param_role_of(id).is_some() {
                return err(span, format!("cannot assign to parameter `{name}`"));
            }
            let value = coerce(v, ctx.func.locals[id].ty, span)?;
            return Ok(StmtKind::Assign { local: id, value });
        }
        match self.globals.get(name) {
            Some(Global::Scalar(sid)) => {
                let sid = *sid;
                if !ctx.is_host() {
                    return err(
                        span,
                        format!("scalar `{name}` is mutated inside a device kernel; declare it as a vector property"),
                    );
                }
                let value = coerce(v, self.scalars[sid].ty, span)?;
                Ok(StmtKind::SetScalar { scalar: sid, value })
            }
            Some(Global::Property(_)) => err(span, format!("property `{name}` must be indexed")),
            Some(_) => err(span, format!("cannot assign to `{name}`")),
            None => err(span, format!("undefined identifier `{name}`")),
        }
    }

    fn indexable_property(&self, name: &str, span: SourceSpan, reduction: bool) -> SResult<PropId> {
        match self.globals.get(name) {
            Some(Global::Property(p)) => Ok(*p),
            Some(Global::Scalar(_)) if reduction => err(span, format!("reduction on scalar `{name}`")),
            Some(Global::Scalar(_)) => err(span, format!("cannot index scalar `{name}`")),
            Some(_) => err(span, format!("`{name}` cannot be indexed")),
            None if name == "argv" => err(span, "`argv` may only be used as the argument of `load`"),
            None => err(span, format!("undefined identifier `{name}`")),
        }
    }

    fn index_expr(&mut self, ctx: &mut FnCtx, prop: PropId, index: &fir::Expr) -> SResult<Expr> {
        let e = self.expr(ctx, index)?;
        let kind = self.properties[prop].element_kind;
        let ok = match kind {
            ElementKind::Edge => matches!(e.ty, Ty::Edge | Ty::Int),
            _ => matches!(e.ty, Ty::Vertex | Ty::Int),
        };
        if !ok {
            return err(
                index.span,
                format!("type mismatch: `{}` is indexed by {}, found {}", self.properties[prop].name, match kind {
                    ElementKind::Edge => "an edge",
                    _ => "a vertex",
                }, e.ty.name()),
            );
        }
        Ok(e)
    }

    fn invocation(&mut self, ctx: &mut FnCtx, e: &fir::Expr) -> SResult<StmtKind> {
        let fir::ExprKind::MethodCall { receiver, name, args } = &e.kind else {
            return err(e.span, "expression statement has no effect");
        };
        let op = match name.as_str() {
            "init" => Operator::Init,
            "process" => Operator::Process,
            _ => return err(e.span, "expression statement has no effect"),
        };
        if !ctx.is_host() {
            return err(e.span, format!("`{name}` may only be invoked from `main`"));
        }
        let fir::ExprKind::Ident(recv) = &receiver.unparen().kind else {
            return err(receiver.span, format!("`{name}` must be applied to a vertexset or edgeset"));
        };
        let set = match self.globals.get(recv) {
            Some(Global::VertexSet) => SetKind::Vertices,
            Some(Global::EdgeSet) => SetKind::Edges,
            _ => return err(receiver.span, format!("`{name}` must be applied to a vertexset or edgeset")),
        };
        let [arg] = args.as_slice() else {
            return err(e.span, format!("`{name}` takes exactly one function"));
        };
        let fname = match &arg.kind {
            fir::ExprKind::FuncRef(n) | fir::ExprKind::Ident(n) => n,
            _ => return err(arg.span, format!("`{name}` expects a function name")),
        };
        let function = match self.globals.get(fname) {
            Some(Global::Function(id)) => *id,
            Some(Global::Main) => return err(arg.span, "`main` cannot be applied to a set"),
            Some(_) => return err(arg.span, format!("`{fname}` is not a function")),
            None => return err(arg.span, format!("undefined function `{fname}`")),
        };
        let f = &self.functions[function];
        let wanted = match set {
            SetKind::Vertices => FunctionRole::VertexFunction,
            SetKind::Edges => FunctionRole::EdgeFunction,
        };
        if f.role != wanted {
            return err(
                arg.span,
                format!(
                    "function role mismatch: `{fname}` is {} but `{recv}.{name}` needs {}",
                    role_text(f.role),
                    role_text(wanted)
                ),
            );
        }
        if set == SetKind::Edges && f.is_weighted() && !self.graph.as_ref().unwrap().weighted {
            return err(arg.span, format!("weighted edge function `{fname}` applied to unweighted edgeset `{recv}`"));
        }
        let model = infer_model(set, op, f);
        let id = self.schedule.len();
        self.schedule.push(Invocation { id, set, op, function, model, stream: None, span: e.span });
        Ok(StmtKind::Invoke(id))
    }

    fn expr(&mut self, ctx: &mut FnCtx, e: &fir::Expr) -> SResult<Expr> {
        use fir::ExprKind as F;
        let span = e.span;
        match &e.kind {
            F::Int(v) => Ok(Expr::int(*v)),
            F::Float(v) => Ok(Expr::new(ExprKind::Float(*v), Ty::Float)),
            F::Bool(b) => Ok(Expr::new(ExprKind::Bool(*b), Ty::Bool)),
            F::Str(_) => err(span, "string literals may only be passed to `load`"),
            F::Paren(inner) => self.expr(ctx, inner),
            F::Ident(name) | F::FuncRef(name) => {
                if let Some(&id) = ctx.scope.get(name) {
                    return Ok(Expr::local(id, ctx.func.locals[id].ty));
                }
                match self.globals.get(name) {
                    Some(Global::Scalar(sid)) => Ok(Expr::new(ExprKind::Scalar(*sid), self.scalars[*sid].ty)),
                    Some(Global::Property(_)) => err(span, format!("property `{name}` must be indexed")),
                    Some(Global::Function(_)) | Some(Global::Main) => {
                        err(span, format!("function `{name}` cannot be used as a value"))
                    }
                    Some(_) => err(span, format!("`{name}` cannot be used as a value")),
                    None if name == "argv" => err(span, "`argv` may only be used as the argument of `load`"),
                    None => err(span, format!("undefined identifier `{name}`")),
                }
            }
            F::Index { name, index } => {
                let prop = self.indexable_property(name, span, false)?;
                let index = self.index_expr(ctx, prop, index)?;
                Ok(Expr::prop(prop, index, self.properties[prop].value_type))
            }
            F::Binary { op, lhs, rhs } => {
                let l = self.expr(ctx, lhs)?;
                let r = self.expr(ctx, rhs)?;
                if op.is_logical() {
                    let l = condition(l, lhs.span)?;
                    let r = condition(r, rhs.span)?;
                    Ok(Expr::new(ExprKind::Binary { op: *op, lhs: Box::new(l), rhs: Box::new(r) }, Ty::Bool))
                } else if op.is_comparison() {
                    compare(*op, l, r, span)
                } else {
                    arith(*op, l, r, span)
                }
            }
            F::Neg(inner) => {
                let v = self.expr(ctx, inner)?;
                match v.ty {
                    Ty::Int | Ty::Float => {
                        let ty = v.ty;
                        // Fold literal negation so `-1` stays a constant.
                        Ok(match v.kind {
                            ExprKind::Int(i) => Expr::int(-i),
                            ExprKind::Float(f) => Expr::new(ExprKind::Float(-f), Ty::Float),
                            _ => Expr::new(ExprKind::Neg(Box::new(v)), ty),
                        })
                    }
                    t => err(span, format!("type mismatch: cannot negate {}", t.name())),
                }
            }
            F::MethodCall { receiver, name, args } => {
                let recv = match &receiver.unparen().kind {
                    F::Ident(r) => r.clone(),
                    _ => return err(receiver.span, format!("unknown method `{name}`")),
                };
                let set = match self.globals.get(&recv) {
                    Some(Global::VertexSet) => Some(SetKind::Vertices),
                    Some(Global::EdgeSet) => Some(SetKind::Edges),
                    _ => None,
                };
                match (name.as_str(), set) {
                    ("size", Some(set)) if args.is_empty() => Ok(Expr::new(ExprKind::SetSize(set), Ty::Int)),
                    ("getNeighbors", _) if ctx.func.role != FunctionRole::VertexFunction => {
                        err(span, "`getNeighbors` used outside a vertex function")
                    }
                    ("getNeighbors", _) => err(span, "`getNeighbors` may only be iterated by a for loop"),
                    ("getVertices", _) => err(span, "`getVertices` may only initialize a vertexset"),
                    ("init" | "process", _) => err(span, format!("`{name}` does not produce a value")),
                    _ => err(span, format!("unknown method `{name}` on `{recv}`")),
                }
            }
            F::Call { name, .. } if name == "load" => err(span, "`load` may only initialize an edgeset"),
            F::Call { name, .. } => err(span, format!("unknown function `{name}`")),
        }
    }
}

fn role_text(r: FunctionRole) -> &'static str {
    match r {
        FunctionRole::VertexFunction => "a vertex function",
        FunctionRole::EdgeFunction => "an edge function",
        FunctionRole::HostFunction => "a host function",
    }
}

pub(crate) fn default_value(ty: Ty) -> Expr {
    match ty {
        Ty::Float => Expr::new(ExprKind::Float(0.0), Ty::Float),
        Ty::Bool => Expr::new(ExprKind::Bool(false), Ty::Bool),
        t => Expr::new(ExprKind::Int(0), t),
    }
}

fn to_float(e: Expr) -> Expr {
    match e.kind {
        ExprKind::Int(v) => Expr::new(ExprKind::Float(v as f64), Ty::Float),
        _ if e.ty == Ty::Float => e,
        _ => Expr::new(ExprKind::ToFloat(Box::new(e)), Ty::Float),
    }
}

/// Converts `e` to `target`, allowing int-to-float widening and element ids to int.
fn coerce(e: Expr, target: Ty, span: SourceSpan) -> SResult<Expr> {
    match (e.ty, target) {
        (a, b) if a == b => Ok(e),
        (Ty::Int | Ty::Vertex | Ty::Edge, Ty::Float) => Ok(to_float(e)),
        (Ty::Vertex | Ty::Edge, Ty::Int) => Ok(Expr { ty: Ty::Int, ..e }),
        (a, b) => err(span, format!("type mismatch: expected {}, found {}", b.name(), a.name())),
    }
}

fn condition(e: Expr, span: SourceSpan) -> SResult<Expr> {
    match e.ty {
        Ty::Bool => Ok(e),
        Ty::Int => Ok(Expr::new(ExprKind::Truthy(Box::new(e)), Ty::Bool)),
        t => err(span, format!("type mismatch: condition must be bool or int, found {}", t.name())),
    }
}

fn arith(op: fir::BinOp, l: Expr, r: Expr, span: SourceSpan) -> SResult<Expr> {
    if !l.ty.is_numeric() || !r.ty.is_numeric() {
        return err(span, format!("type mismatch: `{}` needs numeric operands, found {} and {}", op.symbol(), l.ty.name(), r.ty.name()));
    }
    let (l, r, ty) = if l.ty == Ty::Float || r.ty == Ty::Float {
        (to_float(l), to_float(r), Ty::Float)
    } else {
        (Expr { ty: Ty::Int, ..l }, Expr { ty: Ty::Int, ..r }, Ty::Int)
    };
    Ok(Expr::new(ExprKind::Binary { op, lhs: Box::new(l), rhs: Box::new(r) }, ty))
}

fn compare(op: fir::BinOp, l: Expr, r: Expr, span: SourceSpan) -> SResult<Expr> {
    let (l, r) = match (l.ty, r.ty) {
        (a, b) if a == b && (a != Ty::Bool || matches!(op, fir::BinOp::Eq | fir::BinOp::Ne)) => (l, r),
        (a, b) if a.is_numeric() && b.is_numeric() => {
            if a == Ty::Float || b == Ty::Float {
                (to_float(l), to_float(r))
            } else {
                (Expr { ty: Ty::Int, ..l }, Expr { ty: Ty::Int, ..r })
            }
        }
        (a, b) => {
            return err(span, format!("type mismatch: cannot compare {} with {}", a.name(), b.name()));
        }
    };
    Ok(Expr::new(ExprKind::Binary { op, lhs: Box::new(l), rhs: Box::new(r) }, Ty::Bool))
}

/// Rejects device kernels that write plain scalars or nest invocations.
fn check_kernel_effects(mir: &MirProgram) -> SResult<()> {
    for f in &mir.functions {
        if let Some(s) = f.effects.scalar_writes.first() {
            return err(
                f.span,
                format!("scalar `{}` is mutated inside device kernel `{}`", mir.scalars[*s].name, f.name),
            );
        }
    }
    Ok(())
}
