//! Device kernel text: one function per chain module composed under DATAFLOW.

use std::fmt::Write as _;

use super::cexpr::{c_reduce, c_type, ccond, cexpr, reduce_code, CNames};
use super::plan::{AccessMode, KernelPlan, Module, PlanKernel};
use super::templates::{self, fill};
use crate::sema::*;

struct Names<'a> {
    mir: &'a MirProgram,
    func: &'a MirFunction,
    /// Properties written at the owned index, held in `<name>_own` while an element is processed.
    shadowed: Vec<PropId>,
}

impl CNames for Names<'_> {
    fn prop(&self, prop: PropId, index: &Expr, index_c: String) -> String {
        let name = &self.mir.properties[prop].name;
        if self.shadowed.contains(&prop) && index_class(self.func, index) == IndexClass::Owned {
            format!("{name}_own")
        } else {
            format!("{name}[{index_c}]")
        }
    }

    fn scalar(&self, scalar: ScalarId) -> String {
        format!("{}_val", self.mir.scalars[scalar].name)
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

fn pad(depth: usize) -> String {
    "    ".repeat(depth)
}

fn unit(mir: &MirProgram, prop: PropId) -> String {
    format!("UNIT_{}", mir.properties[prop].name)
}

/// The element index expression in C for owned accesses.
fn element_var(f: &MirFunction) -> String {
    match f.role {
        FunctionRole::VertexFunction => f.param(ParamRole::Vertex).map(|p| p.name.clone()).unwrap_or_else(|| "v".into()),
        _ => f.param(ParamRole::Edge).map(|p| p.name.clone()).unwrap_or_else(|| "edge_id".into()),
    }
}

fn stmts(out: &mut String, n: &Names, body: &[Stmt], depth: usize, skip_frontier: Option<&Expr>) {
    let p = pad(depth);
    for s in body {
        match &s.kind {
            StmtKind::Assign { local, value } => {
                let _ = writeln!(out, "{p}{} = {};", n.func.locals[*local].name, cexpr(value, n));
            }
            StmtKind::SetScalar { scalar, value } => {
                let _ = writeln!(out, "{p}{} = {};", n.scalar(*scalar), cexpr(value, n));
            }
            StmtKind::Store { prop, index, value } | StmtKind::Reduce { prop, index, value, .. } => {
                let op = match &s.kind {
                    StmtKind::Reduce { op, .. } => Some(*op),
                    _ => None,
                };
                let name = &n.mir.properties[*prop].name;
                let v = cexpr(value, n);
                if n.shadowed.contains(prop) && index_class(n.func, index) == IndexClass::Owned {
                    let rhs = match op {
                        Some(op) => c_reduce(op, &format!("{name}_own"), &v),
                        None => v,
                    };
                    let _ = writeln!(out, "{p}{name}_own = {rhs};");
                    let _ = writeln!(out, "{p}{name}_dirty = true;");
                } else {
                    let code = op.map(reduce_code).unwrap_or("OP_ASSIGN");
                    let _ = writeln!(
                        out,
                        "{p}upd.write(make_update({}, {}, {code}, {v}));",
                        unit(n.mir, *prop),
                        cexpr(index, n)
                    );
                }
            }
            StmtKind::LaneAccumulate { slot, value } => {
                let op = n.func.lane_slots[*slot].op;
                let cell = format!("lane_acc{slot}[gt_lane]");
                let _ = writeln!(out, "{p}{cell} = {};", c_reduce(op, &cell, &cexpr(value, n)));
            }
            StmtKind::If { cond, then_body, else_body } => {
                if skip_frontier.is_some_and(|f| std::ptr::eq(f, cond)) {
                    stmts(out, n, then_body, depth, None);
                    continue;
                }
                let _ = writeln!(out, "{p}if ({}) {{", ccond(cond, n));
                stmts(out, n, then_body, depth + 1, None);
                if !else_body.is_empty() {
                    let _ = writeln!(out, "{p}}} else {{");
                    stmts(out, n, else_body, depth + 1, None);
                }
                let _ = writeln!(out, "{p}}}");
            }
            StmtKind::While { cond, body, .. } => {
                let _ = writeln!(out, "{p}while ({}) {{", ccond(cond, n));
                stmts(out, n, body, depth + 1, None);
                let _ = writeln!(out, "{p}}}");
            }
            StmtKind::ForNeighbors { var, vertex, body } => {
                let v = cexpr(vertex, n);
                let _ = writeln!(out, "{p}for (int gt_k = row_offsets[{v}]; gt_k < row_offsets[{v} + 1]; gt_k++) {{");
                let _ = writeln!(out, "{}#pragma HLS PIPELINE II=1", pad(depth + 1));
                let _ = writeln!(out, "{}int {} = columns[gt_k];", pad(depth + 1), n.func.locals[*var].name);
                stmts(out, n, body, depth + 1, None);
                let _ = writeln!(out, "{p}}}");
            }
            StmtKind::Invoke(_) => {}
        }
    }
}

fn prop_param(mir: &MirProgram, b: &super::plan::PropBinding) -> String {
    let ty = c_type(mir.properties[b.prop].value_type);
    match b.access {
        AccessMode::Read => format!("const {ty} *{}", b.name),
        _ => format!("{ty} *{}", b.name),
    }
}

fn open_fn(out: &mut String, m: Module, params: &[String], lanes: u32) {
    let _ = writeln!(out, "static void {}({}) {{", m.function(), params.join(", "));
    for pr in templates::module_pragmas(m) {
        let _ = writeln!(out, "{}", fill(pr, lanes));
    }
}

fn loop_head(out: &mut String, m: Module, header: &str, lanes: u32, depth: usize) {
    let _ = writeln!(out, "{}{header} {{", pad(depth));
    for pr in templates::loop_pragmas(m) {
        let _ = writeln!(out, "{}", fill(pr, lanes));
    }
}

/// Emits the device source of one kernel.
pub fn emit_kernel(mir: &MirProgram, k: &PlanKernel) -> String {
    let f = &mir.functions[k.function];
    let lanes = k.lanes;
    let ecp = k.model == ProcessingModel::Ecp;
    let elem = element_var(f);
    let shadowed: Vec<PropId> = {
        let mut v: Vec<PropId> = f
            .effects
            .writes
            .iter()
            .chain(&f.effects.reductions)
            .filter(|a| a.index == IndexClass::Owned)
            .map(|a| a.prop)
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let n = Names { mir, func: f, shadowed: shadowed.clone() };
    let frontier = if k.has(Module::FrontierCheck) { super::plan::frontier_predicate(f) } else { None };
    let unordered = k.stream == UpdateStreamClass::Unordered;
    let elem_ty = if ecp { "edge_t" } else { "vertex_t" };
    let prop_params: Vec<String> = k.properties.iter().map(|b| prop_param(mir, b)).collect();
    let mut out = String::new();

    let _ = writeln!(
        out,
        "// {}: {}, {} update stream, {lanes} lanes",
        k.name,
        k.model.label(),
        match k.stream {
            UpdateStreamClass::Sequential => "sequential",
            UpdateStreamClass::Unordered => "unordered",
        }
    );
    let chain: Vec<&str> = k.chain.iter().map(|m| m.label()).collect();
    let _ = writeln!(out, "// chain: {}", chain.join(" -> "));
    out.push_str("#include <hls_stream.h>\n#include \"graphitron_types.h\"\n\n");
    let _ = writeln!(out, "#define LANES {lanes}");
    for b in &k.properties {
        let _ = writeln!(out, "#define UNIT_{} {}", b.name, b.memory_unit_id);
    }
    out.push('\n');

    for m in &k.chain {
        match m {
            Module::BurstRead if ecp => {
                open_fn(&mut out, *m, &["const int *edge_src".into(), "const int *edge_dst".into(), "int num_edges".into(), "hls::stream<edge_t> &out".into()], lanes);
                loop_head(&mut out, *m, "for (int i = 0; i < num_edges; i++)", lanes, 1);
                out.push_str("        out.write(edge_t{edge_src[i], edge_dst[i], 1, i, false});\n    }\n");
                out.push_str("    out.write(edge_t{0, 0, 0, 0, true});\n}\n\n");
            }
            Module::BurstRead => {
                open_fn(&mut out, *m, &["int num_vertices".into(), "hls::stream<vertex_t> &out".into()], lanes);
                loop_head(&mut out, *m, "for (int i = 0; i < num_vertices; i++)", lanes, 1);
                out.push_str("        out.write(vertex_t{i, false});\n    }\n");
                out.push_str("    out.write(vertex_t{0, true});\n}\n\n");
            }
            Module::EdgePropRead => {
                open_fn(&mut out, *m, &["const int *edge_weight".into(), "hls::stream<edge_t> &in".into(), "hls::stream<edge_t> &out".into()], lanes);
                loop_head(&mut out, *m, "for (edge_t e = in.read(); !e.last; e = in.read())", lanes, 1);
                out.push_str("        e.weight = edge_weight[e.id];\n        out.write(e);\n    }\n");
                out.push_str("    out.write(edge_t{0, 0, 0, 0, true});\n}\n\n");
            }
            Module::FrontierCheck => {
                let mut params = vec!["hls::stream<vertex_t> &in".to_string()];
                params.extend(prop_params.iter().cloned());
                params.push("hls::stream<vertex_t> &out".into());
                open_fn(&mut out, *m, &params, lanes);
                for b in k.properties.iter().filter(|b| b.scalar.is_some()) {
                    let ty = c_type(mir.properties[b.prop].value_type);
                    let _ = writeln!(out, "    const {ty} {}_val = {}[0];", b.name, b.name);
                }
                loop_head(&mut out, *m, "for (vertex_t gt_v = in.read(); !gt_v.last; gt_v = in.read())", lanes, 1);
                let _ = writeln!(out, "        int {elem} = gt_v.id;");
                let pred = frontier.map(|e| cexpr(e, &Names { shadowed: vec![], ..n })).unwrap_or_else(|| "true".into());
                let _ = writeln!(out, "        if ({pred}) out.write(gt_v);");
                out.push_str("    }\n    out.write(vertex_t{0, true});\n}\n\n");
            }
            Module::EdgeOperation | Module::VertexOperation => {
                let mut params = vec![format!("hls::stream<{elem_ty}> &in")];
                if k.model == ProcessingModel::VcpTraversal {
                    params.push("const int *row_offsets".into());
                    params.push("const int *columns".into());
                }
                params.extend(prop_params.iter().cloned());
                params.push("hls::stream<update_t> &out".into());
                if unordered {
                    params.push("hls::stream<update_t> &upd".into());
                }
                params.push("int num_vertices".into());
                params.push("int num_edges".into());
                open_fn(&mut out, *m, &params, lanes);
                for b in k.properties.iter().filter(|b| b.scalar.is_some()) {
                    let ty = c_type(mir.properties[b.prop].value_type);
                    let _ = writeln!(out, "    const {ty} {}_val = {}[0];", b.name, b.name);
                }
                for (i, slot) in f.lane_slots.iter().enumerate() {
                    let ty = c_type(slot.ty);
                    let init = match (slot.op, slot.ty) {
                        (ReduceOp::Sum, Ty::Float) => "0.0f",
                        (ReduceOp::Sum, _) => "0",
                        (ReduceOp::Min, Ty::Float) => "FLT_MAX",
                        (ReduceOp::Min, _) => "INT_MAX",
                        (ReduceOp::Max, Ty::Float) => "-FLT_MAX",
                        (ReduceOp::Max, _) => "INT_MIN",
                    };
                    let _ = writeln!(out, "    {ty} lane_acc{i}[LANES];");
                    let _ = writeln!(out, "{}", templates::LANE_PARTITION.replace("{var}", &format!("lane_acc{i}")));
                    let _ = writeln!(out, "    for (int gt_l = 0; gt_l < LANES; gt_l++) lane_acc{i}[gt_l] = {init};");
                }
                let header = format!("for ({elem_ty} gt_item = in.read(); !gt_item.last; gt_item = in.read())");
                loop_head(&mut out, *m, &header, lanes, 1);
                for param in &f.params {
                    let field = match param.role {
                        ParamRole::Vertex => "id",
                        ParamRole::Src => "src",
                        ParamRole::Dst => "dst",
                        ParamRole::Weight => "weight",
                        ParamRole::Edge => "id",
                    };
                    let _ = writeln!(out, "        int {} = gt_item.{field};", param.name);
                }
                if ecp && f.param(ParamRole::Edge).is_none() {
                    let _ = writeln!(out, "        int {elem} = gt_item.id;");
                }
                for (i, l) in f.locals.iter().enumerate() {
                    let is_param = f.param_role_of(i).is_some();
                    let is_loop_var = {
                        let mut found = false;
                        walk_stmts(&f.body, &mut |s| found |= matches!(s.kind, StmtKind::ForNeighbors { var, .. } if var == i));
                        found
                    };
                    if !is_param && !is_loop_var {
                        let _ = writeln!(out, "        {} {} = 0;", c_type(l.ty), l.name);
                    }
                }
                if !f.lane_slots.is_empty() {
                    let _ = writeln!(out, "        const int gt_lane = {elem} % LANES;");
                }
                for p in &shadowed {
                    let name = &mir.properties[*p].name;
                    let ty = c_type(mir.properties[*p].value_type);
                    let _ = writeln!(out, "        {ty} {name}_own = {name}[{elem}];");
                    let _ = writeln!(out, "        bool {name}_dirty = false;");
                }
                stmts(&mut out, &n, &f.body, 2, frontier);
                for p in &shadowed {
                    let name = &mir.properties[*p].name;
                    let _ = writeln!(
                        out,
                        "        if ({name}_dirty) out.write(make_update({}, {elem}, OP_ASSIGN, {name}_own));",
                        unit(mir, *p)
                    );
                }
                out.push_str("    }\n");
                for (i, slot) in f.lane_slots.iter().enumerate() {
                    let cell = format!("lane_acc{i}[0]");
                    let _ = writeln!(out, "    for (int gt_l = 1; gt_l < LANES; gt_l++) {cell} = {};", c_reduce(slot.op, &cell, &format!("lane_acc{i}[gt_l]")));
                    let _ = writeln!(
                        out,
                        "    out.write(make_update({}, {}, {}, {cell}));",
                        unit(mir, slot.prop),
                        cexpr(&slot.index, &n),
                        reduce_code(slot.op)
                    );
                }
                if unordered {
                    out.push_str("    upd.write(update_t::end());\n");
                }
                out.push_str("    out.write(update_t::end());\n}\n\n");
            }
            Module::StreamDuplicate => {
                open_fn(&mut out, *m, &["hls::stream<update_t> &in".into(), "hls::stream<update_t> dup[LANES]".into()], lanes);
                out.push_str("    int next = 0;\n");
                loop_head(&mut out, *m, "for (update_t u = in.read(); !u.last; u = in.read())", lanes, 1);
                out.push_str("        dup[next].write(u);\n        next = (next + 1) % LANES;\n    }\n");
                out.push_str("    for (int l = 0; l < LANES; l++) dup[l].write(update_t::end());\n}\n\n");
            }
            Module::Shuffle => {
                open_fn(&mut out, *m, &["hls::stream<update_t> dup[LANES]".into(), "hls::stream<update_t> bank[LANES]".into()], lanes);
                out.push_str("    bool bank_used[LANES];\n    int open_lanes = LANES;\n");
                loop_head(&mut out, *m, "while (open_lanes > 0)", lanes, 1);
                out.push_str("        for (int b = 0; b < LANES; b++) bank_used[b] = false;\n");
                out.push_str("        for (int l = 0; l < LANES; l++) {\n");
                out.push_str("            update_t u;\n            if (!dup[l].read_nb(u)) continue;\n");
                out.push_str("            if (u.last) { open_lanes--; continue; }\n");
                out.push_str("            int b = u.index % LANES;\n");
                out.push_str("            if (bank_used[b]) { stall(u, dup[l]); continue; }\n");
                out.push_str("            bank_used[b] = true;\n            bank[b].write(u);\n        }\n    }\n");
                out.push_str("    for (int b = 0; b < LANES; b++) bank[b].write(update_t::end());\n}\n\n");
            }
            Module::RawResolver => {
                open_fn(&mut out, *m, &["hls::stream<update_t> bank[LANES]".into(), "hls::stream<update_t> resolved[LANES]".into()], lanes);
                out.push_str("    for (int b = 0; b < LANES; b++) {\n#pragma HLS UNROLL\n");
                loop_head(&mut out, *m, "for (update_t u = bank[b].read(); !u.last; u = bank[b].read())", lanes, 2);
                out.push_str("            resolved[b].write(u);\n        }\n        resolved[b].write(update_t::end());\n    }\n}\n\n");
            }
            Module::Reduce => {
                open_fn(&mut out, *m, &["hls::stream<update_t> resolved[LANES]".into(), "hls::stream<update_t> &out".into()], lanes);
                out.push_str("    for (int b = 0; b < LANES; b++) {\n");
                loop_head(&mut out, *m, "for (update_t u = resolved[b].read(); !u.last; u = resolved[b].read())", lanes, 2);
                out.push_str("            out.write(u);\n        }\n    }\n    out.write(update_t::end());\n}\n\n");
            }
            Module::UramCache => {
                let mut params = vec!["hls::stream<update_t> &in".to_string()];
                params.extend(prop_params.iter().filter(|p| !p.starts_with("const ")).cloned());
                params.push("int partition_size".into());
                params.push("hls::stream<update_t> &out".into());
                open_fn(&mut out, *m, &params, lanes);
                out.push_str("    static value_t gt_uram[URAM_WORDS];\n    int gt_base = -1;\n");
                loop_head(&mut out, *m, "for (update_t gt_u = in.read(); !gt_u.last; gt_u = in.read())", lanes, 1);
                out.push_str("        int gt_window = gt_u.index / partition_size * partition_size;\n");
                out.push_str("        if (gt_window != gt_base) {\n            flush_window(gt_uram, gt_base, partition_size, out);\n");
                out.push_str("            load_window(gt_uram, gt_u.unit, gt_window, partition_size);\n            gt_base = gt_window;\n        }\n");
                out.push_str("        gt_uram[gt_u.index - gt_base] = apply_op(gt_u.op, gt_uram[gt_u.index - gt_base], gt_u.value);\n    }\n");
                out.push_str("    flush_window(gt_uram, gt_base, partition_size, out);\n    out.write(update_t::end());\n}\n\n");
            }
            Module::BurstWrite => {
                let mut params = vec!["hls::stream<update_t> &in".to_string()];
                if unordered {
                    params.push("hls::stream<update_t> &cached".into());
                }
                let written: Vec<&super::plan::PropBinding> =
                    k.properties.iter().filter(|b| b.access != AccessMode::Read).collect();
                params.extend(written.iter().map(|b| prop_param(mir, b)));
                open_fn(&mut out, *m, &params, lanes);
                let sources: &[&str] = if unordered { &["in", "cached"] } else { &["in"] };
                for src in sources {
                    loop_head(&mut out, *m, &format!("for (update_t gt_w = {src}.read(); !gt_w.last; gt_w = {src}.read())"), lanes, 1);
                    out.push_str("        switch (gt_w.unit) {\n");
                    for b in &written {
                        let ty = c_type(mir.properties[b.prop].value_type);
                        let _ = writeln!(
                            out,
                            "        case UNIT_{0}: {0}[gt_w.index] = apply_op(gt_w.op, {0}[gt_w.index], gt_w.value).as_{ty}; break;",
                            b.name
                        );
                    }
                    out.push_str("        }\n    }\n");
                }
                out.push_str("}\n\n");
            }
        }
    }

    // Top-level kernel.
    let mut args: Vec<String> = k.graph_buffers.iter().map(|g| format!("const int *{}", g.name())).collect();
    args.extend(prop_params.iter().cloned());
    args.extend(k.scalar_arguments().iter().map(|a| format!("int {a}")));
    let _ = writeln!(out, "extern \"C\" void {}({}) {{", k.name, args.join(", "));
    for (i, g) in k.graph_buffers.iter().enumerate() {
        let _ = writeln!(out, "{}", templates::interface(g.name(), &format!("graph{i}")));
    }
    for b in &k.properties {
        let _ = writeln!(out, "{}", templates::interface(&b.name, &format!("hbm{}", b.channel)));
    }
    for a in k.scalar_arguments() {
        let _ = writeln!(out, "{}", templates::scalar_interface(a));
    }
    let _ = writeln!(out, "{}", templates::DATAFLOW);
    let _ = writeln!(out, "    hls::stream<{elem_ty}> elements(\"elements\");");
    if k.has(Module::EdgePropRead) || k.has(Module::FrontierCheck) {
        let _ = writeln!(out, "    hls::stream<{elem_ty}> filtered(\"filtered\");");
    }
    out.push_str("    hls::stream<update_t> results(\"results\");\n");
    if unordered {
        out.push_str("    hls::stream<update_t> updates(\"updates\");\n");
        out.push_str("    hls::stream<update_t> dup[LANES];\n    hls::stream<update_t> bank[LANES];\n");
        out.push_str("    hls::stream<update_t> resolved[LANES];\n    hls::stream<update_t> reduced(\"reduced\");\n");
        out.push_str("    hls::stream<update_t> cached(\"cached\");\n");
    }
    for v in ["elements", "results"] {
        let _ = writeln!(out, "{}", templates::STREAM_DEPTH.replace("{var}", v));
    }
    let prop_args: Vec<&str> = k.properties.iter().map(|b| b.name.as_str()).collect();
    let op_input = if k.has(Module::EdgePropRead) || k.has(Module::FrontierCheck) { "filtered" } else { "elements" };
    for m in &k.chain {
        let call = match m {
            Module::BurstRead if ecp => "burst_read(edge_src, edge_dst, num_edges, elements);".to_string(),
            Module::BurstRead => "burst_read(num_vertices, elements);".to_string(),
            Module::EdgePropRead => "edge_prop_read(edge_weight, elements, filtered);".to_string(),
            Module::FrontierCheck => {
                let mut a = vec!["elements"];
                a.extend(prop_args.iter().copied());
                a.push("filtered");
                format!("frontier_check({});", a.join(", "))
            }
            Module::EdgeOperation | Module::VertexOperation => {
                let mut a = vec![op_input];
                if k.model == ProcessingModel::VcpTraversal {
                    a.extend(["row_offsets", "columns"]);
                }
                a.extend(prop_args.iter().copied());
                a.push("results");
                if unordered {
                    a.push("updates");
                }
                a.extend(["num_vertices", "num_edges"]);
                format!("{}({});", m.function(), a.join(", "))
            }
            Module::StreamDuplicate => "stream_duplicate(updates, dup);".into(),
            Module::Shuffle => "shuffle(dup, bank);".into(),
            Module::RawResolver => "raw_resolve(bank, resolved);".into(),
            Module::Reduce => "reduce(resolved, reduced);".into(),
            Module::UramCache => {
                let mut a = vec!["reduced"];
                a.extend(k.properties.iter().filter(|b| b.access != AccessMode::Read).map(|b| b.name.as_str()));
                a.extend(["partition_size", "cached"]);
                format!("uram_cache({});", a.join(", "))
            }
            Module::BurstWrite => {
                let mut a = vec!["results"];
                if unordered {
                    a.push("cached");
                }
                a.extend(k.properties.iter().filter(|b| b.access != AccessMode::Read).map(|b| b.name.as_str()));
                format!("burst_write({});", a.join(", "))
            }
        };
        let _ = writeln!(out, "    {call}");
    }
    out.push_str("}\n");
    out
}

/// Device sources for every kernel, as `(kernel name, text)`.
pub fn emit_device(plan: &KernelPlan, mir: &MirProgram) -> Vec<(String, String)> {
    plan.kernels.iter().map(|k| (k.name.clone(), emit_kernel(mir, k))).collect()
}
