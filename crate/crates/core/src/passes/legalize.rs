use super::PassReport;
use crate::diag::Diagnostic;
use crate::sema::*;

/// For `prop[index] = a + b`, returns the addend that is not `prop[index]`.
fn accumulation_addend(prop: PropId, index: &Expr, value: &Expr) -> Option<Expr> {
    let ExprKind::Binary { op: BinOp::Add, lhs, rhs } = &value.kind else { return None };
    let is_self = |e: &Expr| matches!(&e.kind, ExprKind::Prop { prop: p, index: i } if *p == prop && **i == *index);
    let strip = |e: &Expr| match &e.kind {
        ExprKind::ToFloat(inner) if is_self(inner) => Some(()),
        _ if is_self(e) => Some(()),
        _ => None,
    };
    if strip(lhs).is_some() {
        Some((**rhs).clone())
    } else if strip(rhs).is_some() {
        Some((**lhs).clone())
    } else {
        None
    }
}

/// Rewrites non-owned `x[i] = x[i] + e` stores into `x[i] += e`; any other
/// non-owned plain store is a conflicting write.
fn normalize(mir: &MirProgram, f: &mut MirFunction, recognized: &mut usize) -> Result<bool, Diagnostic> {
    let snapshot = f.clone();
    let mut changed = false;
    let mut failure = None;
    walk_stmts_mut(&mut f.body, &mut |s| {
        let StmtKind::Store { prop, index, value } = &s.kind else { return };
        if index_class(&snapshot, index) == IndexClass::Owned {
            return;
        }
        match accumulation_addend(*prop, index, value) {
            Some(addend) if mir.properties[*prop].value_type != Ty::Bool => {
                s.kind = StmtKind::Reduce { prop: *prop, index: index.clone(), op: ReduceOp::Sum, value: addend };
                *recognized += 1;
                changed = true;
            }
            _ if failure.is_none() => {
                failure = Some(Diagnostic::error(
                    s.span,
                    format!(
                        "conflicting write to `{}[{}]` in kernel `{}`: only the owned element may be assigned; use a reduction",
                        mir.properties[*prop].name,
                        expr_text(mir, &snapshot, index),
                        snapshot.name
                    ),
                ));
            }
            _ => {}
        }
    });
    match failure {
        Some(d) => Err(d),
        None => Ok(changed),
    }
}

/// Moves reductions into element-invariant locations to per-lane cells.
fn lane_accumulators(mir: &MirProgram, f: &mut MirFunction, lanes: u32, recognized: &mut usize) -> bool {
    f.effects = compute_effects(mir, f);
    let read_props: Vec<PropId> = f.effects.reads.iter().map(|a| a.prop).collect();
    let snapshot = f.clone();
    let mut slots: Vec<LaneSlot> = f.lane_slots.clone();
    let mut changed = false;
    walk_stmts_mut(&mut f.body, &mut |s| {
        let StmtKind::Reduce { prop, index, op, value } = &s.kind else { return };
        if index_class(&snapshot, index) != IndexClass::Invariant || read_props.contains(prop) {
            return;
        }
        let ty = mir.properties[*prop].value_type;
        let slot = match slots.iter().position(|l| l.prop == *prop && l.index == *index && l.op == *op) {
            Some(i) => i,
            None => {
                slots.push(LaneSlot { prop: *prop, index: index.clone(), op: *op, ty });
                slots.len() - 1
            }
        };
        s.kind = StmtKind::LaneAccumulate { slot, value: value.clone() };
        *recognized += 1;
        changed = true;
    });
    f.lane_slots = slots;
    if !f.lane_slots.is_empty() {
        f.lanes = lanes;
    }
    changed
}

/// Makes process kernels safe to unroll over `lanes` processing elements.
///
/// Accumulations into a location that does not depend on the element (such
/// as a frontier counter `x[0] = x[0] + 1`) get one accumulator cell per
/// lane, combined in ascending lane order after the sweep. Non-owned
/// `x[i] = x[i] + e` stores become `+=` reductions.
pub fn legalize_unroll(mut mir: MirProgram, lanes: u32) -> Result<(MirProgram, PassReport), Diagnostic> {
    let lanes = lanes.max(1);
    refresh_effects(&mut mir);
    let mut report = PassReport::new("legalize");
    for fid in mir.device_functions() {
        let mut f = mir.functions[fid].clone();
        let before_slots = f.lane_slots.len();
        let mut recognized = 0;
        let normalized = normalize(&mir, &mut f, &mut recognized)?;
        let laned = lane_accumulators(&mir, &mut f, lanes, &mut recognized);
        if normalized || laned || f.lanes != mir.functions[fid].lanes {
            report.kernels_rewritten += usize::from(normalized || laned);
            report.temporaries_introduced += f.lane_slots.len() - before_slots;
            report.reductions_recognized += recognized;
            mir.functions[fid] = f;
        }
    }
    refresh_effects(&mut mir);
    Ok((mir, report))
}
