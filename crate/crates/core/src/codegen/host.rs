//! Host driver text replaying main's control skeleton around kernel launches.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::cexpr::{c_reduce, c_type, ccond, cexpr, CNames};
use super::plan::{GraphBuffer, KernelPlan, PlanKernel};
use crate::graphio::DEFAULT_URAM_BYTES;
use crate::sema::*;

struct HostNames<'a> {
    mir: &'a MirProgram,
    func: &'a MirFunction,
}

impl CNames for HostNames<'_> {
    fn prop(&self, prop: PropId, _index: &Expr, index_c: String) -> String {
        format!("{}[{index_c}]", self.mir.properties[prop].name)
    }
    fn scalar(&self, scalar: ScalarId) -> String {
        self.mir.scalars[scalar].name.clone()
    }
    fn set_size(&self, set: SetKind) -> String {
        match set {
            SetKind::Vertices => "num_vertices".into(),
            SetKind::Edges => "num_edges".into(),
        }
    }
    fn local(&self, local: LocalId) -> String {
        self.func.locals[local].name.clone()
    }
}

struct Host<'a> {
    mir: &'a MirProgram,
    plan: &'a KernelPlan,
    /// Properties that kernels write; host reads of them first pull from the device.
    device_written: BTreeSet<PropId>,
    out: String,
}

fn pad(depth: usize) -> String {
    "    ".repeat(depth)
}

fn prop_len(info: &PropertyInfo) -> &'static str {
    match info.element_kind {
        ElementKind::Edge => "num_edges",
        ElementKind::Scalar => "1",
        _ => "num_vertices",
    }
}

fn cell_of(mir: &MirProgram, scalar: ScalarId) -> Option<PropId> {
    mir.properties.iter().position(|p| p.storage == Storage::ScalarCell { scalar } && p.memory_unit_id.is_some())
}

fn props_read(body_exprs: &[&Expr]) -> BTreeSet<PropId> {
    let mut set = BTreeSet::new();
    for e in body_exprs {
        e.visit(&mut |sub| {
            if let ExprKind::Prop { prop, .. } = sub.kind {
                set.insert(prop);
            }
        });
    }
    set
}

fn stmt_exprs(s: &Stmt) -> Vec<&Expr> {
    match &s.kind {
        StmtKind::Assign { value, .. } | StmtKind::SetScalar { value, .. } => vec![value],
        StmtKind::Store { index, value, .. } | StmtKind::Reduce { index, value, .. } => vec![index, value],
        StmtKind::LaneAccumulate { value, .. } => vec![value],
        StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => vec![cond],
        StmtKind::ForNeighbors { vertex, .. } => vec![vertex],
        StmtKind::Invoke(_) => vec![],
    }
}

impl Host<'_> {
    fn line(&mut self, depth: usize, text: &str) {
        let _ = writeln!(self.out, "{}{text}", pad(depth));
    }

    fn migrate(&mut self, depth: usize, prop: PropId, to_host: bool) {
        let name = self.buffer_of(prop);
        let flag = if to_host { "CL_MIGRATE_MEM_OBJECT_HOST" } else { "0" };
        self.line(depth, &format!("clEnqueueMigrateMemObjects(gt_queue, 1, &{name}, {flag}, 0, NULL, NULL);"));
    }

    fn buffer_of(&self, prop: PropId) -> String {
        format!("buf_{}", self.mir.properties[prop].name)
    }

    fn has_buffer(&self, prop: PropId) -> bool {
        self.mir.properties[prop].memory_unit_id.is_some()
    }

    /// Pulls device-written properties read by `exprs` back to the host.
    fn pull(&mut self, depth: usize, exprs: &[&Expr]) {
        let needed: Vec<PropId> = props_read(exprs).into_iter().filter(|p| self.device_written.contains(p)).collect();
        if needed.is_empty() {
            return;
        }
        for p in needed {
            self.migrate(depth, p, true);
        }
        self.line(depth, "clFinish(gt_queue);");
    }

    fn push_prop(&mut self, depth: usize, prop: PropId) {
        if self.has_buffer(prop) {
            self.migrate(depth, prop, false);
        }
    }

    fn body(&mut self, func: &MirFunction, stmts: &[Stmt], depth: usize) {
        let mir = self.mir;
        for s in stmts {
            let n = HostNames { mir, func };
            if !matches!(s.kind, StmtKind::While { .. } | StmtKind::Invoke(_)) {
                let exprs = stmt_exprs(s);
                self.pull(depth, &exprs);
            }
            match &s.kind {
                StmtKind::Assign { local, value } => {
                    self.line(depth, &format!("{} = {};", func.locals[*local].name, cexpr(value, &n)));
                }
                StmtKind::SetScalar { scalar, value } => {
                    let name = &mir.scalars[*scalar].name;
                    self.line(depth, &format!("{name} = {};", cexpr(value, &n)));
                    if let Some(cell) = cell_of(mir, *scalar) {
                        self.line(depth, &format!("{name}_cell[0] = {name};"));
                        self.migrate(depth, cell, false);
                    }
                }
                StmtKind::Store { prop, index, value } => {
                    let lhs = format!("{}[{}]", mir.properties[*prop].name, cexpr(index, &n));
                    self.line(depth, &format!("{lhs} = {};", cexpr(value, &n)));
                    if std::ptr::eq(func, &mir.main) {
                        self.push_prop(depth, *prop);
                    }
                }
                StmtKind::Reduce { prop, index, op, value } => {
                    let lhs = format!("{}[{}]", mir.properties[*prop].name, cexpr(index, &n));
                    self.line(depth, &format!("{lhs} = {};", c_reduce(*op, &lhs, &cexpr(value, &n))));
                    if std::ptr::eq(func, &mir.main) {
                        self.push_prop(depth, *prop);
                    }
                }
                StmtKind::LaneAccumulate { slot, value } => {
                    let ls = &func.lane_slots[*slot];
                    let lhs = format!("{}[{}]", mir.properties[ls.prop].name, cexpr(&ls.index, &n));
                    self.line(depth, &format!("{lhs} = {};", c_reduce(ls.op, &lhs, &cexpr(value, &n))));
                }
                StmtKind::If { cond, then_body, else_body } => {
                    self.line(depth, &format!("if ({}) {{", ccond(cond, &n)));
                    self.body(func, then_body, depth + 1);
                    if !else_body.is_empty() {
                        self.line(depth, "} else {");
                        self.body(func, else_body, depth + 1);
                    }
                    self.line(depth, "}");
                }
                StmtKind::While { cond, body, .. } => {
                    self.pull(depth, &[cond]);
                    self.line(depth, &format!("while ({}) {{", ccond(cond, &n)));
                    self.body(func, body, depth + 1);
                    self.pull(depth + 1, &[cond]);
                    self.line(depth, "}");
                }
                StmtKind::ForNeighbors { var, vertex, body } => {
                    let v = cexpr(vertex, &n);
                    self.line(depth, &format!("for (int gt_k = gt_graph.row_offsets[{v}]; gt_k < gt_graph.row_offsets[{v} + 1]; gt_k++) {{"));
                    self.line(depth + 1, &format!("int {} = gt_graph.columns[gt_k];", func.locals[*var].name));
                    self.body(func, body, depth + 1);
                    self.line(depth, "}");
                }
                StmtKind::Invoke(id) => self.invoke(*id, depth),
            }
        }
    }

    fn invoke(&mut self, id: InvocationId, depth: usize) {
        let mir = self.mir;
        let inv = &mir.schedule[id];
        let f = &mir.functions[inv.function];
        match inv.op {
            Operator::Init => self.init_loop(inv, f, depth),
            Operator::Process => {
                let k = self.plan.kernel_for(inv.function).expect("process invocation without a plan kernel");
                self.enqueue(k, depth);
            }
        }
    }

    fn init_loop(&mut self, inv: &Invocation, f: &MirFunction, depth: usize) {
        let mir = self.mir;
        let set = match inv.set {
            SetKind::Vertices => mir.graph.vertexset.as_deref().unwrap_or("vertices"),
            SetKind::Edges => mir.graph.edgeset.as_str(),
        };
        self.line(depth, &format!("// {set}.init({}) on the host", f.name));
        let (var, bound) = match inv.set {
            SetKind::Vertices => (f.param(ParamRole::Vertex).map(|p| p.name.clone()).unwrap_or_else(|| "v".into()), "num_vertices"),
            SetKind::Edges => (f.param(ParamRole::Edge).map(|p| p.name.clone()).unwrap_or_else(|| "edge_id".into()), "num_edges"),
        };
        self.line(depth, &format!("for (int {var} = 0; {var} < {bound}; {var}++) {{"));
        for p in &f.params {
            let field = match p.role {
                ParamRole::Src => "src",
                ParamRole::Dst => "dst",
                ParamRole::Weight => "weight",
                _ => continue,
            };
            self.line(depth + 1, &format!("int {} = gt_graph.{field}[{var}];", p.name));
        }
        for (i, l) in f.locals.iter().enumerate() {
            let is_loop_var = {
                let mut found = false;
                walk_stmts(&f.body, &mut |s| found |= matches!(s.kind, StmtKind::ForNeighbors { var, .. } if var == i));
                found
            };
            if f.param_role_of(i).is_none() && !is_loop_var {
                self.line(depth + 1, &format!("{} {} = 0;", c_type(l.ty), l.name));
            }
        }
        self.body(f, &f.body, depth + 1);
        self.line(depth, "}");
        for p in f.effects.written_props() {
            self.push_prop(depth, p);
        }
    }

    fn enqueue(&mut self, k: &PlanKernel, depth: usize) {
        let kv = format!("krnl_{}", k.name);
        self.line(depth, &format!("// {}: {}", k.name, k.model.label()));
        let mut i = 0;
        for g in &k.graph_buffers {
            self.line(depth, &format!("clSetKernelArg({kv}, {i}, sizeof(cl_mem), &buf_{});", g.name()));
            i += 1;
        }
        for b in &k.properties {
            self.line(depth, &format!("clSetKernelArg({kv}, {i}, sizeof(cl_mem), &buf_{});", b.name));
            i += 1;
        }
        for a in k.scalar_arguments() {
            let value = if a == "partition_size" { format!("partition_size_{}", k.name) } else { a.to_string() };
            self.line(depth, &format!("clSetKernelArg({kv}, {i}, sizeof(int), &{value});"));
            i += 1;
        }
        self.line(depth, &format!("clEnqueueTask(gt_queue, {kv}, 0, NULL, NULL);"));
        self.line(depth, "clFinish(gt_queue);");
    }
}

/// Emits the host driver for `plan`.
pub fn emit_host(plan: &KernelPlan, mir: &MirProgram) -> String {
    let mut device_written = BTreeSet::new();
    for k in &plan.kernels {
        device_written.extend(mir.functions[k.function].effects.written_props());
    }
    let mut h = Host { mir, plan, device_written, out: String::new() };

    h.out.push_str("// host driver\n#include \"graphitron_host.h\"\n\n");
    let _ = writeln!(h.out, "#define URAM_BYTES {DEFAULT_URAM_BYTES}");
    h.out.push('\n');
    h.out.push_str("int main(int argc, char **argv) {\n");
    let path = match &mir.graph.source {
        GraphSource::Argv(k) => format!("argv[{k}]"),
        GraphSource::Path(p) => format!("{p:?}"),
    };
    h.line(1, &format!("graph_t gt_graph = load_graph({path}, {});", mir.graph.weighted));
    h.line(1, "int num_vertices = gt_graph.num_vertices;");
    h.line(1, "int num_edges = gt_graph.num_edges;");
    h.line(1, "cl_context gt_context = create_context();");
    h.line(1, "cl_command_queue gt_queue = create_queue(gt_context);");
    h.line(1, "cl_program gt_program = load_binary(gt_context, \"graphitron.xclbin\");");
    h.line(1, "cl_int gt_err;");
    h.out.push('\n');

    for s in &mir.scalars {
        let init = s.init.as_ref().map(|e| cexpr(e, &HostNames { mir, func: &mir.main })).unwrap_or_else(|| "0".into());
        h.line(1, &format!("{} {} = {init};", c_type(s.ty), s.name));
    }
    for l in &mir.main.locals {
        h.line(1, &format!("{} {} = 0;", c_type(l.ty), l.name));
    }
    for p in &mir.properties {
        let ty = c_type(p.value_type);
        match p.storage {
            Storage::Vector => h.line(1, &format!("{ty} *{} = host_alloc_{ty}({});", p.name, prop_len(p))),
            Storage::ScalarCell { scalar } if p.memory_unit_id.is_some() => {
                let name = &mir.scalars[scalar].name;
                h.line(1, &format!("{ty} *{name}_cell = host_alloc_{ty}(1);"));
                h.line(1, &format!("{name}_cell[0] = {name};"));
            }
            Storage::ScalarCell { .. } => {}
        }
    }
    h.out.push('\n');

    let mut graph_buffers: Vec<GraphBuffer> = Vec::new();
    for k in &plan.kernels {
        for g in &k.graph_buffers {
            if !graph_buffers.contains(g) {
                graph_buffers.push(*g);
            }
        }
    }
    for g in &graph_buffers {
        let len = match g {
            GraphBuffer::RowOffsets => "num_vertices + 1",
            GraphBuffer::Columns | GraphBuffer::EdgeSrc | GraphBuffer::EdgeDst | GraphBuffer::EdgeWeight => "num_edges",
        };
        let field = match g {
            GraphBuffer::EdgeSrc => "src",
            GraphBuffer::EdgeDst => "dst",
            GraphBuffer::EdgeWeight => "weight",
            GraphBuffer::RowOffsets => "row_offsets",
            GraphBuffer::Columns => "columns",
        };
        h.line(
            1,
            &format!(
                "cl_mem buf_{} = clCreateBuffer(gt_context, CL_MEM_READ_ONLY | CL_MEM_USE_HOST_PTR, sizeof(int) * ({len}), gt_graph.{field}, &gt_err);",
                g.name()
            ),
        );
    }
    let mut units: Vec<(u32, PropId)> =
        mir.properties.iter().enumerate().filter_map(|(i, p)| p.memory_unit_id.map(|u| (u, i))).collect();
    units.sort_unstable();
    for (unit, pid) in &units {
        let p = &mir.properties[*pid];
        let ty = c_type(p.value_type);
        let host = match p.storage {
            Storage::ScalarCell { scalar } => format!("{}_cell", mir.scalars[scalar].name),
            Storage::Vector => p.name.clone(),
        };
        h.line(
            1,
            &format!(
                "cl_mem buf_{} = clCreateBuffer(gt_context, CL_MEM_READ_WRITE | CL_MEM_USE_HOST_PTR, sizeof({ty}) * {}, {host}, &gt_err); // unit {unit}, channel {}",
                p.name,
                prop_len(p),
                p.channel_index.unwrap_or(0)
            ),
        );
    }
    if !graph_buffers.is_empty() {
        let names: Vec<String> = graph_buffers.iter().map(|g| format!("buf_{}", g.name())).collect();
        h.line(1, &format!("cl_mem gt_graph_bufs[] = {{{}}};", names.join(", ")));
        h.line(1, &format!("clEnqueueMigrateMemObjects(gt_queue, {}, gt_graph_bufs, 0, 0, NULL, NULL);", names.len()));
    }
    for (_, pid) in &units {
        h.migrate(1, *pid, false);
    }
    for k in &plan.kernels {
        h.line(1, &format!("cl_kernel krnl_{0} = clCreateKernel(gt_program, \"{0}\", &gt_err);", k.name));
        if k.stream == UpdateStreamClass::Unordered {
            h.line(1, &format!("int partition_size_{} = URAM_BYTES / {};", k.name, k.bytes_per_vertex()));
        }
    }
    h.out.push('\n');

    h.body(&mir.main, &mir.main.body, 1);

    h.out.push('\n');
    let readback: Vec<PropId> = units.iter().map(|(_, p)| *p).filter(|p| mir.properties[*p].is_vector()).collect();
    for p in &readback {
        h.migrate(1, *p, true);
    }
    h.line(1, "clFinish(gt_queue);");
    for (_, p) in mir.vector_properties() {
        h.line(1, &format!("write_results(\"{0}\", {0}, {1});", p.name, prop_len(p)));
    }
    h.line(1, "return 0;");
    h.out.push_str("}\n");
    h.out
}
