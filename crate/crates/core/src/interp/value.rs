use std::fmt;

use serde::Serialize;

use super::RuntimeError;
use crate::sema::{BinOp, ReduceOp, Ty};

/// A runtime value. Vertex and edge ids are carried as `Int`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
}

impl Value {
    pub fn default_for(ty: Ty) -> Value {
        match ty {
            Ty::Float => Value::Float(0.0),
            Ty::Bool => Value::Bool(false),
            _ => Value::Int(0),
        }
    }

    pub fn as_int(self) -> i64 {
        match self {
            Value::Int(v) => v,
            Value::Float(f) => f as i64,
            Value::Bool(b) => b as i64,
        }
    }

    pub fn as_float(self) -> f64 {
        match self {
            Value::Int(v) => v as f64,
            Value::Float(f) => f,
            Value::Bool(b) => b as i64 as f64,
        }
    }

    pub fn as_bool(self) -> bool {
        match self {
            Value::Int(v) => v != 0,
            Value::Float(f) => f != 0.0,
            Value::Bool(b) => b,
        }
    }

    /// Equality for result comparison: exact for ints and bools, relative
    /// tolerance `rel` for floats.
    pub fn close_to(self, other: Value, rel: f64) -> bool {
        match (self, other) {
            (Value::Float(a), Value::Float(b)) => {
                a == b || (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
            }
            (a, b) => a == b,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Float(v) => write!(f, "{v:?}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

fn float(v: f64) -> Result<Value, RuntimeError> {
    if v.is_nan() {
        Err(RuntimeError::NotANumber)
    } else {
        Ok(Value::Float(v))
    }
}

fn overflow(op: &str) -> RuntimeError {
    RuntimeError::Overflow { op: op.to_string() }
}

/// Applies an arithmetic or comparison operator to already-typed operands.
pub fn binary(op: BinOp, l: Value, r: Value) -> Result<Value, RuntimeError> {
    use BinOp::*;
    if let (Value::Float(a), _) | (_, Value::Float(a)) = (l, r) {
        if a.is_nan() {
            return Err(RuntimeError::NotANumber);
        }
    }
    match (op, l, r) {
        (And, a, b) => Ok(Value::Bool(a.as_bool() && b.as_bool())),
        (Or, a, b) => Ok(Value::Bool(a.as_bool() || b.as_bool())),
        (Add, Value::Int(a), Value::Int(b)) => a.checked_add(b).map(Value::Int).ok_or_else(|| overflow("+")),
        (Sub, Value::Int(a), Value::Int(b)) => a.checked_sub(b).map(Value::Int).ok_or_else(|| overflow("-")),
        (Mul, Value::Int(a), Value::Int(b)) => a.checked_mul(b).map(Value::Int).ok_or_else(|| overflow("*")),
        (Div, Value::Int(_), Value::Int(0)) => Err(RuntimeError::DivisionByZero),
        (Div, Value::Int(a), Value::Int(b)) => a.checked_div(b).map(Value::Int).ok_or_else(|| overflow("/")),
        (Div, _, b) if b.as_float() == 0.0 => Err(RuntimeError::DivisionByZero),
        (Add, a, b) => float(a.as_float() + b.as_float()),
        (Sub, a, b) => float(a.as_float() - b.as_float()),
        (Mul, a, b) => float(a.as_float() * b.as_float()),
        (Div, a, b) => float(a.as_float() / b.as_float()),
        (cmp, a, b) => {
            let ord = match (a, b) {
                (Value::Int(x), Value::Int(y)) => x.cmp(&y),
                (Value::Bool(x), Value::Bool(y)) => x.cmp(&y),
                (x, y) => x.as_float().total_cmp(&y.as_float()),
            };
            use std::cmp::Ordering::*;
            Ok(Value::Bool(match cmp {
                Eq => ord == Equal,
                Ne => ord != Equal,
                Lt => ord == Less,
                Le => ord != Greater,
                Gt => ord == Greater,
                Ge => ord != Less,
                _ => unreachable!("arithmetic handled above"),
            }))
        }
    }
}

pub fn negate(v: Value) -> Result<Value, RuntimeError> {
    match v {
        Value::Int(a) => a.checked_neg().map(Value::Int).ok_or_else(|| overflow("-")),
        Value::Float(f) => float(-f),
        Value::Bool(_) => unreachable!("sema rejects negated bools"),
    }
}

/// Combines `old` with `new` under a reduction operator.
pub fn reduce(op: ReduceOp, old: Value, new: Value) -> Result<Value, RuntimeError> {
    match (op, old, new) {
        (ReduceOp::Sum, Value::Int(a), Value::Int(b)) => a.checked_add(b).map(Value::Int).ok_or_else(|| overflow("+=")),
        (ReduceOp::Sum, a, b) => float(a.as_float() + b.as_float()),
        (ReduceOp::Min, Value::Int(a), Value::Int(b)) => Ok(Value::Int(a.min(b))),
        (ReduceOp::Max, Value::Int(a), Value::Int(b)) => Ok(Value::Int(a.max(b))),
        (op, a, b) => {
            let (x, y) = (a.as_float(), b.as_float());
            if x.is_nan() || y.is_nan() {
                return Err(RuntimeError::NotANumber);
            }
            Ok(Value::Float(if op == ReduceOp::Min { x.min(y) } else { x.max(y) }))
        }
    }
}
