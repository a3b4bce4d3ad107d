//! Lexing and parsing of Graphitron source into the front-end IR.

pub mod fir;
pub mod lexer;
pub mod parser;
pub mod pretty;

pub use fir::*;
pub use lexer::{reconstruct, tokenize, Token, TokenKind};
pub use parser::parse;
pub use pretty::pretty_print;

use crate::diag::Diagnostic;

/// Tokenizes and parses `source`.
pub fn parse_source(source: &str) -> Result<FirProgram, Diagnostic> {
    let tokens = tokenize(source)?;
    parse(&tokens)
}
