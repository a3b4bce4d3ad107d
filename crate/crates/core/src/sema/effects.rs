//! Read/write/reduction sets of kernel functions.

use super::display::expr_text;
use super::mir::*;

/// Classifies an index expression relative to the element `func` is applied to.
pub fn index_class(func: &MirFunction, index: &Expr) -> IndexClass {
    match &index.kind {
        ExprKind::Local(id) => match func.param_role_of(*id) {
            Some(ParamRole::Vertex) | Some(ParamRole::Edge) => IndexClass::Owned,
            Some(ParamRole::Src) => IndexClass::Src,
            Some(ParamRole::Dst) => IndexClass::Dst,
            Some(ParamRole::Weight) => IndexClass::Other,
            None if is_neighbor_var(func, *id) => IndexClass::Neighbor,
            None => IndexClass::Other,
        },
        _ if !index.mentions_local() => IndexClass::Invariant,
        _ => IndexClass::Other,
    }
}

fn is_neighbor_var(func: &MirFunction, local: LocalId) -> bool {
    let mut found = false;
    walk_stmts(&func.body, &mut |s| {
        if let StmtKind::ForNeighbors { var, .. } = s.kind {
            found |= var == local;
        }
    });
    found
}

fn push_unique(list: &mut Vec<Access>, a: Access) {
    if !list.contains(&a) {
        list.push(a);
    }
}

pub fn compute_effects(mir: &MirProgram, func: &MirFunction) -> Effects {
    let mut fx = Effects::default();
    let access = |prop: PropId, index: &Expr, op: Option<ReduceOp>| Access {
        prop,
        index: index_class(func, index),
        index_text: expr_text(mir, func, index),
        op,
    };

    let mut reads: Vec<Access> = Vec::new();
    let mut scalar_reads: Vec<ScalarId> = Vec::new();
    let scan = |e: &Expr, reads: &mut Vec<Access>, scalar_reads: &mut Vec<ScalarId>| {
        e.visit(&mut |sub| match &sub.kind {
            ExprKind::Prop { prop, index } => push_unique(reads, access(*prop, index, None)),
            ExprKind::Scalar(s) if !scalar_reads.contains(s) => scalar_reads.push(*s),
            _ => {}
        });
    };

    walk_stmts(&func.body, &mut |s| match &s.kind {
        StmtKind::Assign { value, .. } => scan(value, &mut reads, &mut scalar_reads),
        StmtKind::SetScalar { scalar, value } => {
            scan(value, &mut reads, &mut scalar_reads);
            if !fx.scalar_writes.contains(scalar) {
                fx.scalar_writes.push(*scalar);
            }
        }
        StmtKind::Store { prop, index, value } => {
            scan(index, &mut reads, &mut scalar_reads);
            scan(value, &mut reads, &mut scalar_reads);
            push_unique(&mut fx.writes, access(*prop, index, None));
        }
        StmtKind::Reduce { prop, index, op, value } => {
            scan(index, &mut reads, &mut scalar_reads);
            scan(value, &mut reads, &mut scalar_reads);
            push_unique(&mut fx.reductions, access(*prop, index, Some(*op)));
        }
        StmtKind::LaneAccumulate { slot, value } => {
            scan(value, &mut reads, &mut scalar_reads);
            let ls = &func.lane_slots[*slot];
            scan(&ls.index, &mut reads, &mut scalar_reads);
            push_unique(&mut fx.lane_accumulations, access(ls.prop, &ls.index, Some(ls.op)));
        }
        StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => scan(cond, &mut reads, &mut scalar_reads),
        StmtKind::ForNeighbors { vertex, .. } => {
            scan(vertex, &mut reads, &mut scalar_reads);
            fx.uses_neighbors = true;
        }
        StmtKind::Invoke(_) => {}
    });
    fx.reads = reads;
    fx.scalar_reads = scalar_reads;
    fx
}

/// Recomputes the effects of every function in place.
pub fn refresh_effects(mir: &mut MirProgram) {
    let all: Vec<Effects> = mir.functions.iter().map(|f| compute_effects(mir, f)).collect();
    for (f, fx) in mir.functions.iter_mut().zip(all) {
        f.effects = fx;
    }
    mir.main.effects = compute_effects(mir, &mir.main);
}
