//! Lossless tokenizer.
//!
//! Every token records the whitespace and `#` comments that precede it in
//! `leading`, and the stream always ends with an [`TokenKind::Eof`] token that
//! carries the trailing trivia. Joining `leading + text` over the stream
//! reproduces the input byte-for-byte.

use std::fmt;

use crate::diag::{Diagnostic, SourceSpan};

pub const KEYWORDS: &[&str] = &[
    "element", "end", "const", "func", "var", "if", "else", "while", "for", "in", "true", "false",
    "int", "float", "bool", "vertexset", "edgeset", "vector",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Keyword,
    Identifier,
    IntLiteral,
    FloatLiteral,
    StringLiteral,
    Operator,
    Punctuation,
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TokenKind::Keyword => "keyword",
            TokenKind::Identifier => "identifier",
            TokenKind::IntLiteral => "integer literal",
            TokenKind::FloatLiteral => "float literal",
            TokenKind::StringLiteral => "string literal",
            TokenKind::Operator => "operator",
            TokenKind::Punctuation => "punctuation",
            TokenKind::Eof => "end of file",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: SourceSpan,
    /// Whitespace and comments between the previous token and this one.
    pub leading: String,
}

impl Token {
    pub fn is(&self, kind: TokenKind, text: &str) -> bool {
        self.kind == kind && self.text == text
    }

    pub fn is_keyword(&self, text: &str) -> bool {
        self.is(TokenKind::Keyword, text)
    }

    pub fn is_punct(&self, text: &str) -> bool {
        self.is(TokenKind::Punctuation, text)
    }

    pub fn is_op(&self, text: &str) -> bool {
        self.is(TokenKind::Operator, text)
    }

    pub fn describe(&self) -> String {
        match self.kind {
            TokenKind::Eof => "end of file".to_string(),
            _ => format!("`{}`", self.text),
        }
    }
}

/// Joins the token texts with their recorded trivia.
pub fn reconstruct(tokens: &[Token]) -> String {
    let mut out = String::new();
    for t in tokens {
        out.push_str(&t.leading);
        out.push_str(&t.text);
    }
    out
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn eat_while(&mut self, pred: impl Fn(char) -> bool) {
        while let Some(c) = self.peek() {
            if !pred(c) {
                break;
            }
            self.bump();
        }
    }
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut cur = Cursor { src: source, pos: 0, line: 1, col: 1 };
    let mut tokens = Vec::new();

    loop {
        let trivia_start = cur.pos;
        loop {
            match cur.peek() {
                Some(c) if c.is_whitespace() => {
                    cur.bump();
                }
                Some('#') => cur.eat_while(|c| c != '\n'),
                _ => break,
            }
        }
        let leading = source[trivia_start..cur.pos].to_string();
        let (line, col) = (cur.line, cur.col);
        let start = cur.pos;

        let Some(c) = cur.peek() else {
            tokens.push(Token {
                kind: TokenKind::Eof,
                text: String::new(),
                span: SourceSpan::new(line, col, 1),
                leading,
            });
            return Ok(tokens);
        };

        let kind = if c.is_ascii_alphabetic() || c == '_' {
            cur.eat_while(|c| c.is_ascii_alphanumeric() || c == '_');
            let word = &source[start..cur.pos];
            if (word == "min" || word == "max") && cur.peek() == Some('=') && cur.peek_at(1) != Some('=')
            {
                cur.bump();
                TokenKind::Operator
            } else if KEYWORDS.contains(&word) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            }
        } else if c.is_ascii_digit() {
            cur.eat_while(|c| c.is_ascii_digit());
            if cur.peek() == Some('.') && cur.peek_at(1).is_some_and(|d| d.is_ascii_digit()) {
                cur.bump();
                cur.eat_while(|c| c.is_ascii_digit());
                TokenKind::FloatLiteral
            } else {
                let text = &source[start..cur.pos];
                if text.parse::<i64>().is_err() {
                    return Err(Diagnostic::error(
                        SourceSpan::new(line, col, text.chars().count() as u32),
                        format!("integer literal `{text}` is out of range"),
                    ));
                }
                TokenKind::IntLiteral
            }
        } else if c == '"' {
            cur.bump();
            loop {
                match cur.peek() {
                    None | Some('\n') => {
                        let len = source[start..cur.pos].chars().count() as u32;
                        return Err(Diagnostic::error(
                            SourceSpan::new(line, col, len),
                            "unclosed string constant",
                        ));
                    }
                    Some('"') => {
                        cur.bump();
                        break;
                    }
                    Some('\\') => {
                        cur.bump();
                        if cur.peek().is_some_and(|c| c != '\n') {
                            cur.bump();
                        }
                    }
                    Some(_) => {
                        cur.bump();
                    }
                }
            }
            TokenKind::StringLiteral
        } else {
            let two: String = [Some(c), cur.peek_at(1)].iter().flatten().collect();
            if ["==", "!=", "<=", ">=", "+="].contains(&two.as_str()) {
                cur.bump();
                cur.bump();
                TokenKind::Operator
            } else if "+-*/<>=&|".contains(c) {
                cur.bump();
                TokenKind::Operator
            } else if "()[]{},;:.".contains(c) {
                cur.bump();
                TokenKind::Punctuation
            } else {
                return Err(Diagnostic::error(
                    SourceSpan::new(line, col, 1),
                    format!("illegal character `{}`", c.escape_debug()),
                ));
            }
        };

        let text = source[start..cur.pos].to_string();
        let span = SourceSpan::new(line, col, text.chars().count() as u32);
        tokens.push(Token { kind, text, span, leading });
    }
}

/// Decodes the body of a string literal token (quotes stripped, `\x` escapes resolved).
pub fn unquote(text: &str) -> String {
    let inner = text.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(text);
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('n') => out.push('\n'),
                Some('t') => out.push('\t'),
                Some(other) => out.push(other),
                None => {}
            }
        } else {
            out.push(c);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<(TokenKind, String)> {
        tokenize(src)
            .unwrap()
            .into_iter()
            .filter(|t| t.kind != TokenKind::Eof)
            .map(|t| (t.kind, t.text))
            .collect()
    }

    #[test]
    fn element_declaration() {
        use TokenKind::*;
        assert_eq!(
            kinds("element Vertex end"),
            vec![
                (Keyword, "element".into()),
                (Identifier, "Vertex".into()),
                (Keyword, "end".into())
            ]
        );
    }

    #[test]
    fn min_reduction_statement() {
        use TokenKind::*;
        let got = kinds("tuple[dst] min= level+1;");
        let want: Vec<(TokenKind, String)> = [
            (Identifier, "tuple"),
            (Punctuation, "["),
            (Identifier, "dst"),
            (Punctuation, "]"),
            (Operator, "min="),
            (Identifier, "level"),
            (Operator, "+"),
            (IntLiteral, "1"),
            (Punctuation, ";"),
        ]
        .iter()
        .map(|(k, s)| (*k, s.to_string()))
        .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn min_as_identifier_when_not_followed_by_assign() {
        let got = kinds("min == max");
        assert_eq!(got[0], (TokenKind::Identifier, "min".into()));
        assert_eq!(got[1], (TokenKind::Operator, "==".into()));
    }

    #[test]
    fn unclosed_string() {
        let err = tokenize("x = load(\"abc").unwrap_err();
        assert!(err.is_error());
        assert_eq!(err.message, "unclosed string constant");
        assert_eq!((err.span.line, err.span.column), (1, 10));
    }

    #[test]
    fn illegal_character() {
        let err = tokenize("a @ b").unwrap_err();
        assert!(err.message.contains("illegal character"));
        assert_eq!(err.span.column, 3);
    }

    #[test]
    fn float_and_method_dot() {
        use TokenKind::*;
        let got = kinds("0.05*vertices.size()");
        assert_eq!(got[0], (FloatLiteral, "0.05".into()));
        assert_eq!(got[3], (Punctuation, ".".into()));
    }

    #[test]
    fn lossless_with_comments() {
        let src = "# header\nfunc f(v: Vertex)  # trailing\n\tx[v] = 1;\nend\n\n";
        let toks = tokenize(src).unwrap();
        assert_eq!(reconstruct(&toks), src);
        let last = toks.last().unwrap();
        assert_eq!(last.kind, TokenKind::Eof);
    }

    #[test]
    fn spans_are_one_based() {
        let toks = tokenize("a\n  bb").unwrap();
        assert_eq!(toks[0].span, SourceSpan::new(1, 1, 1));
        assert_eq!(toks[1].span, SourceSpan::new(2, 3, 2));
    }

    #[test]
    fn integer_overflow_literal() {
        assert!(tokenize("99999999999999999999").is_err());
    }
}
