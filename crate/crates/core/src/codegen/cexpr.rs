//! Rendering of MIR expressions as C.

use crate::sema::*;

pub fn c_type(ty: Ty) -> &'static str {
    match ty {
        Ty::Float => "float",
        Ty::Bool => "bool",
        _ => "int",
    }
}

/// How names resolve in the surrounding C code.
pub trait CNames {
    fn prop(&self, prop: PropId, index: &Expr, index_c: String) -> String;
    fn scalar(&self, scalar: ScalarId) -> String;
    fn set_size(&self, set: SetKind) -> String;
    fn local(&self, local: LocalId) -> String;
}

fn c_op(op: BinOp) -> &'static str {
    match op {
        BinOp::And => "&&",
        BinOp::Or => "||",
        other => other.symbol(),
    }
}

pub fn cexpr(e: &Expr, names: &dyn CNames) -> String {
    render(e, names, 0)
}

/// A condition without the outer parentheses an `if (...)` already supplies.
pub fn ccond(e: &Expr, names: &dyn CNames) -> String {
    match &e.kind {
        ExprKind::Truthy(inner) => format!("{} != 0", render(inner, names, 4)),
        _ => render(e, names, 0),
    }
}

fn render(e: &Expr, names: &dyn CNames, min_prec: u8) -> String {
    match &e.kind {
        ExprKind::Int(v) => v.to_string(),
        ExprKind::Float(v) => format!("{v:?}f"),
        ExprKind::Bool(b) => b.to_string(),
        ExprKind::Local(l) => names.local(*l),
        ExprKind::Scalar(s) => names.scalar(*s),
        ExprKind::Prop { prop, index } => names.prop(*prop, index, render(index, names, 0)),
        ExprKind::SetSize(set) => names.set_size(*set),
        ExprKind::Binary { op, lhs, rhs } => {
            let p = op.precedence();
            let text = format!("{} {} {}", render(lhs, names, p), c_op(*op), render(rhs, names, p + 1));
            if p < min_prec {
                format!("({text})")
            } else {
                text
            }
        }
        ExprKind::Neg(inner) => format!("-{}", render(inner, names, 6)),
        ExprKind::ToFloat(inner) => format!("(float){}", render(inner, names, 6)),
        ExprKind::Truthy(inner) => format!("({} != 0)", render(inner, names, 4)),
    }
}

/// C text combining `old` with `new` under a reduction.
pub fn c_reduce(op: ReduceOp, old: &str, new: &str) -> String {
    match op {
        ReduceOp::Sum => format!("{old} + {new}"),
        ReduceOp::Min => format!("(({new}) < {old} ? ({new}) : {old})"),
        ReduceOp::Max => format!("(({new}) > {old} ? ({new}) : {old})"),
    }
}

pub fn reduce_code(op: ReduceOp) -> &'static str {
    match op {
        ReduceOp::Sum => "OP_SUM",
        ReduceOp::Min => "OP_MIN",
        ReduceOp::Max => "OP_MAX",
    }
}
