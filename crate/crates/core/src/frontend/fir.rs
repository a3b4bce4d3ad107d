//! Front-end syntax tree.

use serde::Serialize;

use crate::diag::SourceSpan;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirProgram {
    pub declarations: Vec<Decl>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Decl {
    Element(ElementDecl),
    Const(ConstDecl),
    Func(FuncDecl),
}

impl Decl {
    pub fn span(&self) -> SourceSpan {
        match self {
            Decl::Element(d) => d.span,
            Decl::Const(d) => d.span,
            Decl::Func(d) => d.span,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElementDecl {
    pub name: String,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstDecl {
    pub name: String,
    pub ty: TypeExpr,
    pub init: Option<Expr>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuncDecl {
    pub name: String,
    pub params: Vec<Param>,
    pub body: Vec<Stmt>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Param {
    pub name: String,
    pub ty: TypeExpr,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum TypeExpr {
    Int,
    Float,
    Bool,
    /// An element name such as `Vertex` or `Edge`.
    Named(String),
    VertexSet { element: String },
    EdgeSet { element: String, src: String, dst: String, weight: Option<Box<TypeExpr>> },
    Vector { element: String, value: Box<TypeExpr> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ReduceOp {
    Min,
    Max,
    Sum,
}

impl ReduceOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ReduceOp::Min => "min=",
            ReduceOp::Max => "max=",
            ReduceOp::Sum => "+=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum LValue {
    Name { name: String, span: SourceSpan },
    Index { name: String, index: Box<Expr>, span: SourceSpan },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum StmtKind {
    VarDecl { name: String, ty: TypeExpr, init: Option<Expr> },
    Assign { target: LValue, value: Expr },
    /// `name[index] min= value`, `max=`, or `+=`.
    Reduce { name: String, index: Expr, op: ReduceOp, value: Expr },
    /// `name += value` on a scalar.
    CompoundAssign { name: String, value: Expr },
    If { cond: Expr, then_body: Vec<Stmt>, else_body: Option<Vec<Stmt>> },
    While { cond: Expr, body: Vec<Stmt> },
    ForIn { var: String, iter: Expr, body: Vec<Stmt> },
    Expr(Expr),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&",
            BinOp::Or => "|",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 3,
            BinOp::Add | BinOp::Sub => 4,
            BinOp::Mul | BinOp::Div => 5,
        }
    }

    pub fn from_symbol(s: &str) -> Option<BinOp> {
        Some(match s {
            "+" => BinOp::Add,
            "-" => BinOp::Sub,
            "*" => BinOp::Mul,
            "/" => BinOp::Div,
            "==" => BinOp::Eq,
            "!=" => BinOp::Ne,
            "<" => BinOp::Lt,
            "<=" => BinOp::Le,
            ">" => BinOp::Gt,
            ">=" => BinOp::Ge,
            "&" => BinOp::And,
            "|" => BinOp::Or,
            _ => return None,
        })
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 3
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinOp::And | BinOp::Or)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ExprKind {
    Int(i64),
    Float(f64),
    Bool(bool),
    Str(String),
    Ident(String),
    /// A bare function name passed to `init` / `process`.
    FuncRef(String),
    Index { name: String, index: Box<Expr> },
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Neg(Box<Expr>),
    Paren(Box<Expr>),
    MethodCall { receiver: Box<Expr>, name: String, args: Vec<Expr> },
    Call { name: String, args: Vec<Expr> },
}

impl Expr {
    pub fn new(kind: ExprKind, span: SourceSpan) -> Self {
        Expr { kind, span }
    }

    /// Strips redundant parentheses.
    pub fn unparen(&self) -> &Expr {
        match &self.kind {
            ExprKind::Paren(inner) => inner.unparen(),
            _ => self,
        }
    }
}

impl FirProgram {
    pub fn functions(&self) -> impl Iterator<Item = &FuncDecl> {
        self.declarations.iter().filter_map(|d| match d {
            Decl::Func(f) => Some(f),
            _ => None,
        })
    }

    pub fn function(&self, name: &str) -> Option<&FuncDecl> {
        self.functions().find(|f| f.name == name)
    }

    /// A copy with every span reset, for structural comparison.
    pub fn without_spans(&self) -> FirProgram {
        let mut p = self.clone();
        for d in &mut p.declarations {
            match d {
                Decl::Element(e) => e.span = SourceSpan::DUMMY,
                Decl::Const(c) => {
                    c.span = SourceSpan::DUMMY;
                    if let Some(e) = &mut c.init {
                        clear_expr(e);
                    }
                }
                Decl::Func(f) => {
                    f.span = SourceSpan::DUMMY;
                    for p in &mut f.params {
                        p.span = SourceSpan::DUMMY;
                    }
                    clear_block(&mut f.body);
                }
            }
        }
        p
    }
}

fn clear_block(stmts: &mut [Stmt]) {
    for s in stmts {
        s.span = SourceSpan::DUMMY;
        match &mut s.kind {
            StmtKind::VarDecl { init, .. } => {
                if let Some(e) = init {
                    clear_expr(e);
                }
            }
            StmtKind::Assign { target, value } => {
                match target {
                    LValue::Name { span, .. } => *span = SourceSpan::DUMMY,
                    LValue::Index { index, span, .. } => {
                        *span = SourceSpan::DUMMY;
                        clear_expr(index);
                    }
                }
                clear_expr(value);
            }
            StmtKind::Reduce { index, value, .. } => {
                clear_expr(index);
                clear_expr(value);
            }
            StmtKind::CompoundAssign { value, .. } => clear_expr(value),
            StmtKind::If { cond, then_body, else_body } => {
                clear_expr(cond);
                clear_block(then_body);
                if let Some(b) = else_body {
                    clear_block(b);
                }
            }
            StmtKind::While { cond, body } => {
                clear_expr(cond);
                clear_block(body);
            }
            StmtKind::ForIn { iter, body, .. } => {
                clear_expr(iter);
                clear_block(body);
            }
            StmtKind::Expr(e) => clear_expr(e),
        }
    }
}

fn clear_expr(e: &mut Expr) {
    e.span = SourceSpan::DUMMY;
    match &mut e.kind {
        ExprKind::Index { index, .. } => clear_expr(index),
        ExprKind::Binary { lhs, rhs, .. } => {
            clear_expr(lhs);
            clear_expr(rhs);
        }
        ExprKind::Neg(inner) | ExprKind::Paren(inner) => clear_expr(inner),
        ExprKind::MethodCall { receiver, args, .. } => {
            clear_expr(receiver);
            args.iter_mut().for_each(clear_expr);
        }
        ExprKind::Call { args, .. } => args.iter_mut().for_each(clear_expr),
        _ => {}
    }
}
