//! Human-readable rendering of MIR.

use std::fmt::Write as _;

use super::mir::*;

/// Renders an expression in source-like syntax.
pub fn expr_text(mir: &MirProgram, func: &MirFunction, e: &Expr) -> String {
    render(mir, func, e, 0)
}

fn render(mir: &MirProgram, func: &MirFunction, e: &Expr, min_prec: u8) -> String {
    match &e.kind {
        ExprKind::Int(v) => v.to_string(),
        ExprKind::Float(v) => format!("{v:?}"),
        ExprKind::Bool(b) => b.to_string(),
        ExprKind::Local(id) => func.locals.get(*id).map(|l| l.name.clone()).unwrap_or_else(|| format!("%{id}")),
        ExprKind::Scalar(id) => mir.scalars[*id].name.clone(),
        ExprKind::Prop { prop, index } => format!("{}[{}]", mir.properties[*prop].name, render(mir, func, index, 0)),
        ExprKind::SetSize(SetKind::Vertices) => {
            format!("{}.size()", mir.graph.vertexset.as_deref().unwrap_or("vertices"))
        }
        ExprKind::SetSize(SetKind::Edges) => format!("{}.size()", mir.graph.edgeset),
        ExprKind::Binary { op, lhs, rhs } => {
            let p = op.precedence();
            let text = format!("{} {} {}", render(mir, func, lhs, p), op.symbol(), render(mir, func, rhs, p + 1));
            if p < min_prec {
                format!("({text})")
            } else {
                text
            }
        }
        ExprKind::Neg(inner) => format!("-{}", render(mir, func, inner, 6)),
        ExprKind::ToFloat(inner) | ExprKind::Truthy(inner) => render(mir, func, inner, min_prec),
    }
}

fn block(out: &mut String, mir: &MirProgram, func: &MirFunction, stmts: &[Stmt], depth: usize) {
    let pad = "    ".repeat(depth);
    for s in stmts {
        match &s.kind {
            StmtKind::Assign { local, value } => {
                let _ = writeln!(out, "{pad}{} = {};", func.locals[*local].name, expr_text(mir, func, value));
            }
            StmtKind::SetScalar { scalar, value } => {
                let _ = writeln!(out, "{pad}{} = {};", mir.scalars[*scalar].name, expr_text(mir, func, value));
            }
            StmtKind::Store { prop, index, value } => {
                let _ = writeln!(
                    out,
                    "{pad}{}[{}] = {};",
                    mir.properties[*prop].name,
                    expr_text(mir, func, index),
                    expr_text(mir, func, value)
                );
            }
            StmtKind::Reduce { prop, index, op, value } => {
                let _ = writeln!(
                    out,
                    "{pad}{}[{}] {} {};",
                    mir.properties[*prop].name,
                    expr_text(mir, func, index),
                    op.symbol(),
                    expr_text(mir, func, value)
                );
            }
            StmtKind::LaneAccumulate { slot, value } => {
                let _ = writeln!(out, "{pad}lane_acc{slot}[lane] {} {};", func.lane_slots[*slot].op.symbol(), expr_text(mir, func, value));
            }
            StmtKind::If { cond, then_body, else_body } => {
                let _ = writeln!(out, "{pad}if {}", expr_text(mir, func, cond));
                block(out, mir, func, then_body, depth + 1);
                if !else_body.is_empty() {
                    let _ = writeln!(out, "{pad}else");
                    block(out, mir, func, else_body, depth + 1);
                }
                let _ = writeln!(out, "{pad}end");
            }
            StmtKind::While { id, cond, body } => {
                let _ = writeln!(out, "{pad}while#{id} {}", expr_text(mir, func, cond));
                block(out, mir, func, body, depth + 1);
                let _ = writeln!(out, "{pad}end");
            }
            StmtKind::ForNeighbors { var, vertex, body } => {
                let _ = writeln!(
                    out,
                    "{pad}for {} in {}.getNeighbors()",
                    func.locals[*var].name,
                    expr_text(mir, func, vertex)
                );
                block(out, mir, func, body, depth + 1);
                let _ = writeln!(out, "{pad}end");
            }
            StmtKind::Invoke(id) => {
                let inv = &mir.schedule[*id];
                let set = match inv.set {
                    SetKind::Vertices => mir.graph.vertexset.as_deref().unwrap_or("vertices"),
                    SetKind::Edges => mir.graph.edgeset.as_str(),
                };
                let op = match inv.op {
                    Operator::Init => "init",
                    Operator::Process => "process",
                };
                let mut note = String::new();
                if let Some(m) = inv.model {
                    note.push_str(&format!("  # {}", m.label()));
                }
                if let Some(s) = inv.stream {
                    note.push_str(&format!(", {s:?}"));
                }
                let _ = writeln!(out, "{pad}{set}.{op}({});{note}", mir.functions[inv.function].name);
            }
        }
    }
}

fn access_list(mir: &MirProgram, accesses: &[Access]) -> String {
    let items: Vec<String> = accesses
        .iter()
        .map(|a| match a.op {
            Some(op) => format!("{}[{}] {}", mir.properties[a.prop].name, a.index_text, op.symbol()),
            None => format!("{}[{}]", mir.properties[a.prop].name, a.index_text),
        })
        .collect();
    format!("{{{}}}", items.join(", "))
}

pub fn render_mir(mir: &MirProgram) -> String {
    let mut out = String::new();
    let g = &mir.graph;
    let _ = writeln!(
        out,
        "graph {}: edgeset{{{}}} weighted={} source={:?}",
        g.edgeset, g.edge_element, g.weighted, g.source
    );
    let _ = writeln!(out, "\nproperties (channels = {}):", mir.channels);
    for p in &mir.properties {
        let unit = p.memory_unit_id.map(|u| u.to_string()).unwrap_or_else(|| "-".into());
        let chan = p.channel_index.map(|c| c.to_string()).unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "  {:<14} {:<7} {:<6} {:<7} unit={unit:<3} channel={chan}",
            p.name,
            format!("{:?}", p.element_kind).to_lowercase(),
            p.value_type.name(),
            format!("{:?}", p.placement).to_lowercase(),
        );
    }
    let _ = writeln!(out, "\nscalars:");
    for s in &mir.scalars {
        let _ = writeln!(out, "  {:<14} {:<6} {}", s.name, s.ty.name(), format!("{:?}", s.placement).to_lowercase());
    }
    for f in &mir.functions {
        let params: Vec<String> =
            f.params.iter().map(|p| format!("{}: {:?}", p.name, p.role)).collect();
        let _ = writeln!(out, "\nfunc {} ({:?}) ({})", f.name, f.role, params.join(", "));
        let _ = writeln!(out, "  reads:      {}", access_list(mir, &f.effects.reads));
        let _ = writeln!(out, "  writes:     {}", access_list(mir, &f.effects.writes));
        let _ = writeln!(out, "  reductions: {}", access_list(mir, &f.effects.reductions));
        if !f.lane_slots.is_empty() {
            let _ = writeln!(out, "  lanes: {}  accumulators: {}", f.lanes, access_list(mir, &f.effects.lane_accumulations));
        }
        block(&mut out, mir, f, &f.body, 1);
        out.push_str("end\n");
    }
    let _ = writeln!(out, "\nmain");
    block(&mut out, mir, &mir.main, &mir.main.body, 1);
    out.push_str("end\n");
    let _ = writeln!(out, "\nschedule:");
    for inv in &mir.schedule {
        let _ = writeln!(
            out,
            "  #{} {:?}.{:?}({}) model={} stream={}",
            inv.id,
            inv.set,
            inv.op,
            mir.functions[inv.function].name,
            inv.model.map(|m| m.label()).unwrap_or("host"),
            inv.stream.map(|s| format!("{s:?}")).unwrap_or_else(|| "-".into())
        );
    }
    out
}
