//! Canonical source rendering of a [`FirProgram`].

use std::fmt::Write as _;

use super::fir::*;

const INDENT: &str = "    ";

pub fn pretty_print(program: &FirProgram) -> String {
    let mut out = String::new();
    for decl in &program.declarations {
        match decl {
            Decl::Element(e) => {
                let _ = writeln!(out, "element {} end", e.name);
            }
            Decl::Const(c) => {
                out.push_str(&const_decl(c));
                out.push('\n');
            }
            Decl::Func(f) => {
                let params: Vec<String> =
                    f.params.iter().map(|p| format!("{}: {}", p.name, type_expr(&p.ty))).collect();
                let _ = writeln!(out, "func {}({})", f.name, params.join(", "));
                block(&mut out, &f.body, 1);
                out.push_str("end\n");
            }
        }
    }
    out
}

pub fn const_decl(c: &ConstDecl) -> String {
    match &c.init {
        Some(init) => format!("const {}: {} = {};", c.name, type_expr(&c.ty), expr(init)),
        None => format!("const {}: {};", c.name, type_expr(&c.ty)),
    }
}

pub fn type_expr(t: &TypeExpr) -> String {
    match t {
        TypeExpr::Int => "int".into(),
        TypeExpr::Float => "float".into(),
        TypeExpr::Bool => "bool".into(),
        TypeExpr::Named(n) => n.clone(),
        TypeExpr::VertexSet { element } => format!("vertexset{{{element}}}"),
        TypeExpr::EdgeSet { element, src, dst, weight } => match weight {
            Some(w) => format!("edgeset{{{element}}}({src}, {dst}, {})", type_expr(w)),
            None => format!("edgeset{{{element}}}({src}, {dst})"),
        },
        TypeExpr::Vector { element, value } => format!("vector{{{element}}}({})", type_expr(value)),
    }
}

fn block(out: &mut String, stmts: &[Stmt], depth: usize) {
    for s in stmts {
        stmt(out, s, depth);
    }
}

fn stmt(out: &mut String, s: &Stmt, depth: usize) {
    let pad = INDENT.repeat(depth);
    match &s.kind {
        StmtKind::VarDecl { name, ty, init } => match init {
            Some(e) => {
                let _ = writeln!(out, "{pad}var {name}: {} = {};", type_expr(ty), expr(e));
            }
            None => {
                let _ = writeln!(out, "{pad}var {name}: {};", type_expr(ty));
            }
        },
        StmtKind::Assign { target, value } => {
            let lhs = match target {
                LValue::Name { name, .. } => name.clone(),
                LValue::Index { name, index, .. } => format!("{name}[{}]", expr(index)),
            };
            let _ = writeln!(out, "{pad}{lhs} = {};", expr(value));
        }
        StmtKind::Reduce { name, index, op, value } => {
            let _ = writeln!(out, "{pad}{name}[{}] {} {};", expr(index), op.symbol(), expr(value));
        }
        StmtKind::CompoundAssign { name, value } => {
            let _ = writeln!(out, "{pad}{name} += {};", expr(value));
        }
        StmtKind::If { cond, then_body, else_body } => {
            let _ = writeln!(out, "{pad}if {}", expr(cond));
            block(out, then_body, depth + 1);
            if let Some(b) = else_body {
                let _ = writeln!(out, "{pad}else");
                block(out, b, depth + 1);
            }
            let _ = writeln!(out, "{pad}end");
        }
        StmtKind::While { cond, body } => {
            let _ = writeln!(out, "{pad}while {}", expr(cond));
            block(out, body, depth + 1);
            let _ = writeln!(out, "{pad}end");
        }
        StmtKind::ForIn { var, iter, body } => {
            let _ = writeln!(out, "{pad}for {var} in {}", expr(iter));
            block(out, body, depth + 1);
            let _ = writeln!(out, "{pad}end");
        }
        StmtKind::Expr(e) => {
            let _ = writeln!(out, "{pad}{};", expr(e));
        }
    }
}

pub fn expr(e: &Expr) -> String {
    render(e, 0)
}

fn float_text(v: f64) -> String {
    // `{:?}` always keeps a fractional part, so the literal re-lexes as a float.
    format!("{v:?}")
}

/// Renders `e`, adding parentheses when its own precedence is below `min_prec`.
fn render(e: &Expr, min_prec: u8) -> String {
    match &e.kind {
        ExprKind::Int(v) if *v < 0 => paren_if(format!("-{}", v.unsigned_abs()), 6 < min_prec),
        ExprKind::Int(v) => v.to_string(),
        ExprKind::Float(v) if v.is_sign_negative() => paren_if(format!("-{}", float_text(-v)), 6 < min_prec),
        ExprKind::Float(v) => float_text(*v),
        ExprKind::Bool(b) => b.to_string(),
        ExprKind::Str(s) => format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\"")),
        ExprKind::Ident(n) | ExprKind::FuncRef(n) => n.clone(),
        ExprKind::Index { name, index } => format!("{name}[{}]", render(index, 0)),
        ExprKind::Binary { op, lhs, rhs } => {
            let p = op.precedence();
            let text = format!("{} {} {}", render(lhs, p), op.symbol(), render(rhs, p + 1));
            paren_if(text, p < min_prec)
        }
        ExprKind::Neg(inner) => format!("-{}", render(inner, 6)),
        ExprKind::Paren(inner) => format!("({})", render(inner, 0)),
        ExprKind::MethodCall { receiver, name, args } => {
            let args: Vec<String> = args.iter().map(expr).collect();
            format!("{}.{name}({})", render(receiver, 7), args.join(", "))
        }
        ExprKind::Call { name, args } => {
            let args: Vec<String> = args.iter().map(expr).collect();
            format!("{name}({})", args.join(", "))
        }
    }
}

fn paren_if(text: String, cond: bool) -> String {
    if cond {
        format!("({text})")
    } else {
        text
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diag::SourceSpan;
    use crate::frontend::{lexer::tokenize, parser::parse};

    fn e(kind: ExprKind) -> Expr {
        Expr::new(kind, SourceSpan::DUMMY)
    }

    #[test]
    fn const_decl_text() {
        let c = ConstDecl { name: "level".into(), ty: TypeExpr::Int, init: Some(e(ExprKind::Int(1))), span: SourceSpan::DUMMY };
        let p = FirProgram { declarations: vec![Decl::Const(c)] };
        assert_eq!(pretty_print(&p), "const level: int = 1;\n");
    }

    #[test]
    fn empty_program_is_empty_text() {
        assert_eq!(pretty_print(&FirProgram { declarations: vec![] }), "");
    }

    #[test]
    fn synthesized_tree_gets_needed_parens() {
        let sum = e(ExprKind::Binary {
            op: BinOp::Add,
            lhs: Box::new(e(ExprKind::Ident("b".into()))),
            rhs: Box::new(e(ExprKind::Ident("c".into()))),
        });
        let prod = e(ExprKind::Binary { op: BinOp::Mul, lhs: Box::new(e(ExprKind::Ident("a".into()))), rhs: Box::new(sum) });
        assert_eq!(expr(&prod), "a * (b + c)");
        let left = e(ExprKind::Binary {
            op: BinOp::Sub,
            lhs: Box::new(e(ExprKind::Ident("a".into()))),
            rhs: Box::new(e(ExprKind::Binary {
                op: BinOp::Sub,
                lhs: Box::new(e(ExprKind::Ident("b".into()))),
                rhs: Box::new(e(ExprKind::Ident("c".into()))),
            })),
        });
        assert_eq!(expr(&left), "a - (b - c)");
    }

    #[test]
    fn float_literals_keep_fraction() {
        let src = "const x: float = 1.0;\nconst y: float = 0.05 * 2.0;\n";
        let p = parse(&tokenize(src).unwrap()).unwrap();
        assert_eq!(pretty_print(&p), src);
    }
}
