use super::{fresh_name, renumber_schedule, PassReport};
use crate::sema::*;

/// Properties an edge kernel both reads through `src` and reduces through `dst`.
fn conflicts(f: &MirFunction) -> Vec<PropId> {
    let mut v: Vec<PropId> = f
        .effects
        .reductions
        .iter()
        .filter(|r| r.index == IndexClass::Dst)
        .filter(|r| f.effects.reads.iter().any(|a| a.prop == r.prop && a.index == IndexClass::Src))
        .map(|r| r.prop)
        .collect();
    v.sort_unstable();
    v.dedup();
    v
}

fn copy_kernel(name: String, pairs: &[(PropId, PropId)], mir: &MirProgram, span: crate::diag::SourceSpan) -> MirFunction {
    let v = Expr::local(0, Ty::Vertex);
    let body = pairs
        .iter()
        .map(|&(src, tmp)| {
            let ty = mir.properties[src].value_type;
            Stmt::new(StmtKind::Store { prop: tmp, index: v.clone(), value: Expr::prop(src, v.clone(), ty) }, span)
        })
        .collect();
    MirFunction {
        name,
        role: FunctionRole::VertexFunction,
        params: vec![MirParam { name: "v".into(), role: ParamRole::Vertex, local: 0 }],
        locals: vec![Local { name: "v".into(), ty: Ty::Vertex }],
        body,
        effects: Effects::default(),
        lanes: 1,
        lane_slots: vec![],
        span,
    }
}

/// Redirects every `prop[src]` read in `f` to the matching temporary.
fn redirect_reads(f: &mut MirFunction, pairs: &[(PropId, PropId)]) {
    let src = f.param(ParamRole::Src).map(|p| p.local);
    let fix = &mut |e: &mut Expr| {
        if let ExprKind::Prop { prop, index } = &mut e.kind {
            if matches!(index.kind, ExprKind::Local(l) if Some(l) == src) {
                if let Some(&(_, tmp)) = pairs.iter().find(|(p, _)| p == prop) {
                    *prop = tmp;
                }
            }
        }
    };
    walk_stmts_mut(&mut f.body, &mut |s| match &mut s.kind {
        StmtKind::Assign { value, .. } | StmtKind::SetScalar { value, .. } | StmtKind::LaneAccumulate { value, .. } => {
            value.visit_mut(fix)
        }
        StmtKind::Store { index, value, .. } | StmtKind::Reduce { index, value, .. } => {
            index.visit_mut(fix);
            value.visit_mut(fix);
        }
        StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => cond.visit_mut(fix),
        StmtKind::ForNeighbors { vertex, .. } => vertex.visit_mut(fix),
        StmtKind::Invoke(_) => {}
    });
}

/// Splits every edge kernel that reads `P[src]` and reduces into `P[dst]`
/// into a vertex copy kernel `tmp[v] = P[v]` followed by the original kernel
/// reading `tmp[src]`. The copy is scheduled immediately before each
/// rewritten invocation.
pub fn decouple_pipeline_conflicts(mut mir: MirProgram) -> (MirProgram, PassReport) {
    refresh_effects(&mut mir);
    let mut report = PassReport::new("decouple");
    let targets: Vec<FuncId> = mir
        .process_invocations()
        .filter(|i| i.set == SetKind::Edges)
        .map(|i| i.function)
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .filter(|f| !conflicts(&mir.functions[*f]).is_empty())
        .collect();

    for fid in targets {
        let props = conflicts(&mir.functions[fid]);
        let span = mir.functions[fid].span;
        let base = mir.functions[fid].name.clone();
        let mut pairs = Vec::new();
        for &p in &props {
            let name = fresh_name(&mir, "tmp");
            let info = &mir.properties[p];
            let tmp = PropertyInfo {
                name,
                element_kind: ElementKind::Vertex,
                value_type: info.value_type,
                placement: Placement::Device,
                memory_unit_id: None,
                channel_index: None,
                storage: Storage::Vector,
                span: info.span,
            };
            mir.properties.push(tmp);
            pairs.push((p, mir.properties.len() - 1));
        }
        report.temporaries_introduced += pairs.len();
        report.reductions_recognized += mir.functions[fid]
            .effects
            .reductions
            .iter()
            .filter(|r| r.index == IndexClass::Dst && props.contains(&r.prop))
            .count();
        report.kernels_rewritten += 1;

        let copy_name = fresh_name(&mir, &format!("{base}0"));
        let copy = copy_kernel(copy_name, &pairs, &mir, span);
        mir.functions.push(copy);
        let copy_id = mir.functions.len() - 1;

        let mut rewritten = mir.functions[fid].clone();
        rewritten.name = fresh_name(&mir, &format!("{base}1"));
        redirect_reads(&mut rewritten, &pairs);
        let shared_with_init = mir.schedule.iter().any(|i| i.function == fid && i.op == Operator::Init);
        let new_fid = if shared_with_init {
            mir.functions.push(rewritten);
            mir.functions.len() - 1
        } else {
            mir.functions[fid] = rewritten;
            fid
        };

        let mut copies = std::collections::HashMap::new();
        let ids: Vec<InvocationId> =
            mir.schedule.iter().filter(|i| i.function == fid && i.op == Operator::Process).map(|i| i.id).collect();
        for id in ids {
            mir.schedule[id].function = new_fid;
            let copy_inv = Invocation {
                id: mir.schedule.len(),
                set: SetKind::Vertices,
                op: Operator::Process,
                function: copy_id,
                model: Some(ProcessingModel::VcpApply),
                stream: None,
                span: mir.schedule[id].span,
            };
            copies.insert(id, copy_inv.id);
            mir.schedule.push(copy_inv);
        }
        insert_before(&mut mir.main.body, &copies);
        renumber_schedule(&mut mir);
    }
    refresh_effects(&mut mir);
    let channels = mir.channels;
    (detect_properties(mir, channels), report)
}

fn insert_before(stmts: &mut Vec<Stmt>, copies: &std::collections::HashMap<InvocationId, InvocationId>) {
    let mut out = Vec::with_capacity(stmts.len());
    for mut s in std::mem::take(stmts) {
        match &mut s.kind {
            StmtKind::Invoke(id) => {
                if let Some(c) = copies.get(id) {
                    out.push(Stmt::new(StmtKind::Invoke(*c), s.span));
                }
            }
            StmtKind::If { then_body, else_body, .. } => {
                insert_before(then_body, copies);
                insert_before(else_body, copies);
            }
            StmtKind::While { body, .. } | StmtKind::ForNeighbors { body, .. } => insert_before(body, copies),
            _ => {}
        }
        out.push(s);
    }
    *stmts = out;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::programs;

    #[test]
    fn sssp_splits_into_copy_and_reduce() {
        let mir = compile_source(programs::SSSP).unwrap();
        let (out, report) = decouple_pipeline_conflicts(mir);
        assert_eq!((report.kernels_rewritten, report.temporaries_introduced, report.reductions_recognized), (1, 1, 1));
        let copy = out.function("sssp0").unwrap();
        let kernel = out.function("sssp1").unwrap();
        assert!(out.function("sssp").is_none());
        let text = |f: &MirFunction| {
            let mut s = String::new();
            walk_stmts(&f.body, &mut |st| {
                if let StmtKind::Store { prop, index, value } | StmtKind::Reduce { prop, index, value, .. } = &st.kind {
                    let op = match &st.kind {
                        StmtKind::Reduce { op, .. } => op.symbol(),
                        _ => "=",
                    };
                    s = format!(
                        "{}[{}] {op} {}",
                        out.properties[*prop].name,
                        expr_text(&out, f, index),
                        expr_text(&out, f, value)
                    );
                }
            });
            s
        };
        assert_eq!(text(copy), "tmp[v] = SP[v]");
        assert_eq!(text(kernel), "SP[dst] min= tmp[src] + weight");
        assert_eq!(copy.role, FunctionRole::VertexFunction);
        let names: Vec<&str> = out.process_invocations().map(|i| out.functions[i.function].name.as_str()).collect();
        assert_eq!(names, vec!["sssp0", "sssp1", "Detect"]);
        let tmp = out.property("tmp").unwrap();
        assert_eq!((tmp.placement, tmp.element_kind, tmp.value_type), (Placement::Device, ElementKind::Vertex, Ty::Int));
        for (i, inv) in out.schedule.iter().enumerate() {
            assert_eq!(inv.id, i);
        }
    }

    #[test]
    fn idempotent() {
        let (once, _) = decouple_pipeline_conflicts(compile_source(programs::SSSP).unwrap());
        let (twice, report) = decouple_pipeline_conflicts(once.clone());
        assert_eq!(report.kernels_rewritten, 0);
        assert_eq!(once, twice);
    }

    #[test]
    fn bfs_untouched() {
        let mir = compile_source(programs::BFS).unwrap();
        let (out, report) = decouple_pipeline_conflicts(mir.clone());
        assert_eq!(report.kernels_rewritten, 0);
        assert_eq!(out, mir);
    }

    #[test]
    fn copy_precedes_every_use() {
        let src = programs::SSSP.replace(
            "        vertices.process(Detect);\n",
            "        vertices.process(Detect);\n        if (active)\n            edges.process(sssp);\n        end\n",
        );
        let (out, report) = decouple_pipeline_conflicts(compile_source(&src).unwrap());
        assert_eq!(report.kernels_rewritten, 1);
        let order: Vec<&str> = out.process_invocations().map(|i| out.functions[i.function].name.as_str()).collect();
        assert_eq!(order, vec!["sssp0", "sssp1", "Detect", "sssp0", "sssp1"]);
    }
}
