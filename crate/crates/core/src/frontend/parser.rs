//! Recursive-descent parser producing a [`FirProgram`].

use super::fir::*;
use super::lexer::{unquote, Token, TokenKind};
use crate::diag::Diagnostic;

type PResult<T> = Result<T, Diagnostic>;

pub fn parse(tokens: &[Token]) -> PResult<FirProgram> {
    if tokens.last().map(|t| t.kind) != Some(TokenKind::Eof) {
        let span = tokens.last().map(|t| t.span).unwrap_or_default();
        return Err(Diagnostic::error(span, "token stream is not terminated by end of file"));
    }
    let mut p = Parser { tokens, pos: 0 };
    p.program()
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
}

impl<'t> Parser<'t> {
    fn peek(&self) -> &'t Token {
        &self.tokens[self.pos]
    }

    fn peek_nth(&self, n: usize) -> &'t Token {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i]
    }

    fn bump(&mut self) -> &'t Token {
        let t = &self.tokens[self.pos];
        if t.kind != TokenKind::Eof {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> Diagnostic {
        let t = self.peek();
        Diagnostic::error(t.span, format!("unexpected token {}; expected {}", t.describe(), expected))
    }

    fn expect_punct(&mut self, p: &str) -> PResult<&'t Token> {
        if self.peek().is_punct(p) {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&format!("`{p}`")))
        }
    }

    fn expect_keyword(&mut self, k: &str) -> PResult<&'t Token> {
        if self.peek().is_keyword(k) {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&format!("`{k}`")))
        }
    }

    fn expect_ident(&mut self) -> PResult<&'t Token> {
        if self.peek().kind == TokenKind::Identifier {
            Ok(self.bump())
        } else {
            Err(self.unexpected("an identifier"))
        }
    }

    fn program(&mut self) -> PResult<FirProgram> {
        let mut declarations = Vec::new();
        loop {
            let t = self.peek();
            if t.kind == TokenKind::Eof {
                break;
            }
            let decl = if t.is_keyword("element") {
                self.bump();
                let name = self.expect_ident()?;
                self.expect_keyword("end")?;
                Decl::Element(ElementDecl { name: name.text.clone(), span: t.span })
            } else if t.is_keyword("const") {
                Decl::Const(self.const_decl()?)
            } else if t.is_keyword("func") {
                Decl::Func(self.func_decl()?)
            } else {
                return Err(self.unexpected("`element`, `const` or `func`"));
            };
            declarations.push(decl);
        }
        Ok(FirProgram { declarations })
    }

    fn const_decl(&mut self) -> PResult<ConstDecl> {
        let kw = self.bump();
        let name = self.expect_ident()?;
        self.expect_punct(":")?;
        let ty = self.type_expr()?;
        let init = if self.peek().is_op("=") {
            self.bump();
            Some(self.expr()?)
        } else {
            None
        };
        self.expect_punct(";")?;
        Ok(ConstDecl { name: name.text.clone(), ty, init, span: kw.span })
    }

    fn func_decl(&mut self) -> PResult<FuncDecl> {
        let kw = self.bump();
        let name = self.expect_ident()?;
        self.expect_punct("(")?;
        let mut params = Vec::new();
        if !self.peek().is_punct(")") {
            loop {
                let pname = self.expect_ident()?;
                self.expect_punct(":")?;
                let ty = self.type_expr()?;
                params.push(Param { name: pname.text.clone(), ty, span: pname.span });
                if self.peek().is_punct(",") {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        let body = self.block(&["end"])?;
        self.expect_keyword("end")?;
        Ok(FuncDecl { name: name.text.clone(), params, body, span: kw.span })
    }

    fn type_expr(&mut self) -> PResult<TypeExpr> {
        let t = self.peek();
        if t.kind == TokenKind::Identifier {
            self.bump();
            return Ok(TypeExpr::Named(t.text.clone()));
        }
        if t.kind != TokenKind::Keyword {
            return Err(self.unexpected("a type"));
        }
        let ty = match t.text.as_str() {
            "int" => {
                self.bump();
                TypeExpr::Int
            }
            "float" => {
                self.bump();
                TypeExpr::Float
            }
            "bool" => {
                self.bump();
                TypeExpr::Bool
            }
            "vertexset" => {
                self.bump();
                let element = self.braced_ident()?;
                TypeExpr::VertexSet { element }
            }
            "edgeset" => {
                self.bump();
                let element = self.braced_ident()?;
                self.expect_punct("(")?;
                let src = self.expect_ident()?.text.clone();
                self.expect_punct(",")?;
                let dst = self.expect_ident()?.text.clone();
                let weight = if self.peek().is_punct(",") {
                    self.bump();
                    Some(Box::new(self.type_expr()?))
                } else {
                    None
                };
                self.expect_punct(")")?;
                TypeExpr::EdgeSet { element, src, dst, weight }
            }
            "vector" => {
                self.bump();
                let element = self.braced_ident()?;
                self.expect_punct("(")?;
                let value = Box::new(self.type_expr()?);
                self.expect_punct(")")?;
                TypeExpr::Vector { element, value }
            }
            _ => return Err(self.unexpected("a type")),
        };
        Ok(ty)
    }

    fn braced_ident(&mut self) -> PResult<String> {
        self.expect_punct("{")?;
        let name = self.expect_ident()?.text.clone();
        self.expect_punct("}")?;
        Ok(name)
    }

    /// Parses statements until one of `terminators` (keywords) is next.
    fn block(&mut self, terminators: &[&str]) -> PResult<Vec<Stmt>> {
        let mut stmts = Vec::new();
        loop {
            let t = self.peek();
            if t.kind == TokenKind::Keyword && terminators.contains(&t.text.as_str()) {
                return Ok(stmts);
            }
            if t.kind == TokenKind::Eof {
                let expected = terminators.iter().map(|k| format!("`{k}`")).collect::<Vec<_>>().join(" or ");
                return Err(Diagnostic::error(t.span, format!("missing {expected} before end of file")));
            }
            stmts.push(self.stmt()?);
        }
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let t = self.peek();
        let span = t.span;
        let kind = if t.is_keyword("var") {
            self.bump();
            let name = self.expect_ident()?.text.clone();
            self.expect_punct(":")?;
            let ty = self.type_expr()?;
            let init = if self.peek().is_op("=") {
                self.bump();
                Some(self.expr()?)
            } else {
                None
            };
            self.expect_punct(";")?;
            StmtKind::VarDecl { name, ty, init }
        } else if t.is_keyword("if") {
            self.bump();
            let cond = self.expr()?;
            let then_body = self.block(&["else", "end"])?;
            let else_body = if self.peek().is_keyword("else") {
                self.bump();
                Some(self.block(&["end"])?)
            } else {
                None
            };
            self.expect_keyword("end")?;
            StmtKind::If { cond, then_body, else_body }
        } else if t.is_keyword("while") {
            self.bump();
            let cond = self.expr()?;
            let body = self.block(&["end"])?;
            self.expect_keyword("end")?;
            StmtKind::While { cond, body }
        } else if t.is_keyword("for") {
            self.bump();
            let var = self.expect_ident()?.text.clone();
            self.expect_keyword("in")?;
            let iter = self.expr()?;
            let body = self.block(&["end"])?;
            self.expect_keyword("end")?;
            StmtKind::ForIn { var, iter, body }
        } else if t.kind == TokenKind::Identifier || t.is_punct("(") || t.kind == TokenKind::Keyword && (t.text == "true" || t.text == "false") || matches!(t.kind, TokenKind::IntLiteral | TokenKind::FloatLiteral | TokenKind::StringLiteral) || t.is_op("-") {
            self.simple_stmt()?
        } else {
            return Err(self.unexpected("a statement"));
        };
        Ok(Stmt { kind, span })
    }

    fn simple_stmt(&mut self) -> PResult<StmtKind> {
        let lhs = self.expr()?;
        let op = self.peek();
        let kind = if op.is_punct(";") {
            StmtKind::Expr(lhs)
        } else if op.is_op("=") {
            self.bump();
            let target = match lhs.kind {
                ExprKind::Ident(name) => LValue::Name { name, span: lhs.span },
                ExprKind::Index { name, index } => LValue::Index { name, index, span: lhs.span },
                _ => return Err(Diagnostic::error(lhs.span, "invalid assignment target")),
            };
            let value = self.expr()?;
            StmtKind::Assign { target, value }
        } else if op.is_op("+=") || op.is_op("min=") || op.is_op("max=") {
            self.bump();
            let rop = match op.text.as_str() {
                "+=" => ReduceOp::Sum,
                "min=" => ReduceOp::Min,
                _ => ReduceOp::Max,
            };
            let value = self.expr()?;
            match lhs.kind {
                ExprKind::Index { name, index } => StmtKind::Reduce { name, index: *index, op: rop, value },
                ExprKind::Ident(name) if rop == ReduceOp::Sum => StmtKind::CompoundAssign { name, value },
                _ => {
                    return Err(Diagnostic::error(
                        op.span,
                        format!("reduction operator `{}` applied to non-indexed lvalue", op.text),
                    ))
                }
            }
        } else {
            return Err(self.unexpected("`;`, `=`, `+=`, `min=` or `max=`"));
        };
        self.expect_punct(";")?;
        Ok(kind)
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        self.binary(1)
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let t = self.peek();
            let Some(op) = (t.kind == TokenKind::Operator).then(|| BinOp::from_symbol(&t.text)).flatten() else {
                break;
            };
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.bump();
            let rhs = self.binary(prec + 1)?;
            let span = lhs.span;
            lhs = Expr::new(ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }, span);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let t = self.peek();
        if t.is_op("-") {
            self.bump();
            let inner = self.unary()?;
            return Ok(Expr::new(ExprKind::Neg(Box::new(inner)), t.span));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        while self.peek().is_punct(".") {
            self.bump();
            let name = self.expect_ident()?;
            let args = self.call_args(&name.text)?;
            let span = e.span;
            e = Expr::new(ExprKind::MethodCall { receiver: Box::new(e), name: name.text.clone(), args }, span);
        }
        Ok(e)
    }

    fn call_args(&mut self, callee: &str) -> PResult<Vec<Expr>> {
        self.expect_punct("(")?;
        let mut args = Vec::new();
        if !self.peek().is_punct(")") {
            loop {
                let mut arg = self.expr()?;
                if matches!(callee, "init" | "process") {
                    if let ExprKind::Ident(name) = &arg.kind {
                        arg.kind = ExprKind::FuncRef(name.clone());
                    }
                }
                args.push(arg);
                if self.peek().is_punct(",") {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        Ok(args)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let t = self.peek();
        let span = t.span;
        let kind = match t.kind {
            TokenKind::IntLiteral => {
                self.bump();
                ExprKind::Int(t.text.parse().map_err(|_| Diagnostic::error(span, "integer literal out of range"))?)
            }
            TokenKind::FloatLiteral => {
                self.bump();
                ExprKind::Float(t.text.parse().map_err(|_| Diagnostic::error(span, "malformed float literal"))?)
            }
            TokenKind::StringLiteral => {
                self.bump();
                ExprKind::Str(unquote(&t.text))
            }
            TokenKind::Keyword if t.text == "true" || t.text == "false" => {
                self.bump();
                ExprKind::Bool(t.text == "true")
            }
            TokenKind::Identifier => {
                self.bump();
                let name = t.text.clone();
                if self.peek().is_punct("[") {
                    self.bump();
                    let index = self.expr()?;
                    self.expect_punct("]")?;
                    ExprKind::Index { name, index: Box::new(index) }
                } else if self.peek().is_punct("(") && self.peek_nth(0).span.line == span.line {
                    let args = self.call_args(&name)?;
                    ExprKind::Call { name, args }
                } else {
                    ExprKind::Ident(name)
                }
            }
            TokenKind::Punctuation if t.text == "(" => {
                self.bump();
                let inner = self.expr()?;
                self.expect_punct(")")?;
                ExprKind::Paren(Box::new(inner))
            }
            _ => return Err(self.unexpected("an expression")),
        };
        Ok(Expr::new(kind, span))
    }
}
