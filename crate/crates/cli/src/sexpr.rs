//! A minimal s-expression reader for the on-disk document formats.
//!
//! Documents are UTF-8 text holding exactly one s-expression, with `;`
//! starting a comment that runs to the end of the line.  The reader keeps
//! line and column positions on every node so schema errors downstream can
//! point at the offending token rather than just naming it.

use std::fmt;

use thiserror::Error;

/// A source position, 1-indexed the way editors count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.col)
    }
}

/// One node of the parsed tree: a bare symbol or a parenthesised list.
///
/// There is no string or number type; every leaf is a symbol, and the
/// document layer decides which symbols name predicates, constants, or
/// numerals.  That keeps the reader trivial and the formats uniform.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExpr {
    Symbol { text: String, pos: Pos },
    List { items: Vec<SExpr>, pos: Pos },
}

impl SExpr {
    pub fn pos(&self) -> Pos {
        match self {
            SExpr::Symbol { pos, .. } => *pos,
            SExpr::List { pos, .. } => *pos,
        }
    }

    /// The symbol text, if this node is a symbol.
    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            SExpr::Symbol { text, .. } => Some(text),
            SExpr::List { .. } => None,
        }
    }

    /// The item slice, if this node is a list.
    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::Symbol { .. } => None,
            SExpr::List { items, .. } => Some(items),
        }
    }

    /// The head symbol of a non-empty list, e.g. `and` in `(and p q)`.
    pub fn head(&self) -> Option<&str> {
        self.as_list().and_then(|items| items.first()).and_then(SExpr::as_symbol)
    }
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SExpr::Symbol { text, .. } => write!(f, "{text}"),
            SExpr::List { items, .. } => {
                write!(f, "(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{item}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Reader failures, each anchored to a position.
#[derive(Debug, Error)]
pub enum SexprError {
    #[error("{pos}: unexpected closing parenthesis")]
    UnexpectedClose { pos: Pos },
    #[error("{pos}: unclosed parenthesis")]
    UnclosedParen { pos: Pos },
    #[error("{pos}: expected a single expression but found another")]
    TrailingContent { pos: Pos },
    #[error("document is empty")]
    Empty,
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    at: usize,
    line: usize,
    col: usize,
}

#[derive(Debug)]
enum Token {
    Open(Pos),
    Close(Pos),
    Symbol(String, Pos),
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src, bytes: src.as_bytes(), at: 0, line: 1, col: 1 }
    }

    fn bump(&mut self) {
        if self.bytes[self.at] == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        self.at += 1;
    }

    fn next_token(&mut self) -> Option<Token> {
        loop {
            let b = *self.bytes.get(self.at)?;
            match b {
                b' ' | b'\t' | b'\r' | b'\n' => self.bump(),
                b';' => {
                    while self.at < self.bytes.len() && self.bytes[self.at] != b'\n' {
                        self.bump();
                    }
                }
                b'(' => {
                    let pos = Pos { line: self.line, col: self.col };
                    self.bump();
                    return Some(Token::Open(pos));
                }
                b')' => {
                    let pos = Pos { line: self.line, col: self.col };
                    self.bump();
                    return Some(Token::Close(pos));
                }
                _ => {
                    let pos = Pos { line: self.line, col: self.col };
                    let start = self.at;
                    while self.at < self.bytes.len()
                        && !matches!(
                            self.bytes[self.at],
                            b' ' | b'\t' | b'\r' | b'\n' | b'(' | b')' | b';'
                        )
                    {
                        self.bump();
                    }
                    let text = self.src[start..self.at].to_string();
                    return Some(Token::Symbol(text, pos));
                }
            }
        }
    }
}

/// Reads the single expression a document holds.
///
/// Anything other than exactly one expression (after comments and
/// whitespace) is an error: the formats put one document in one file.
pub fn parse_document(src: &str) -> Result<SExpr, SexprError> {
    let mut lexer = Lexer::new(src);
    let expr = parse_expr(&mut lexer)?.ok_or(SexprError::Empty)?;
    if let Some(token) = lexer.next_token() {
        let pos = match token {
            Token::Open(pos) | Token::Close(pos) | Token::Symbol(_, pos) => pos,
        };
        return Err(SexprError::TrailingContent { pos });
    }
    Ok(expr)
}

fn parse_expr(lexer: &mut Lexer<'_>) -> Result<Option<SExpr>, SexprError> {
    let token = match lexer.next_token() {
        Some(token) => token,
        None => return Ok(None),
    };
    match token {
        Token::Symbol(text, pos) => Ok(Some(SExpr::Symbol { text, pos })),
        Token::Close(pos) => Err(SexprError::UnexpectedClose { pos }),
        Token::Open(pos) => Ok(Some(parse_list_body(lexer, pos)?)),
    }
}

fn parse_list_body(lexer: &mut Lexer<'_>, open: Pos) -> Result<SExpr, SexprError> {
    let mut items = Vec::new();
    loop {
        let token = lexer.next_token().ok_or(SexprError::UnclosedParen { pos: open })?;
        match token {
            Token::Close(_) => return Ok(SExpr::List { items, pos: open }),
            Token::Symbol(text, pos) => items.push(SExpr::Symbol { text, pos }),
            Token::Open(inner) => items.push(parse_list_body(lexer, inner)?),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_nested_lists_with_positions() {
        let doc = parse_document("(a (b c)\n  d)").unwrap();
        let items = doc.as_list().unwrap();
        assert_eq!(items[0].as_symbol(), Some("a"));
        assert_eq!(items[1].head(), Some("b"));
        assert_eq!(items[2].as_symbol(), Some("d"));
        assert_eq!(items[2].pos(), Pos { line: 2, col: 3 });
    }

    #[test]
    fn comments_run_to_end_of_line() {
        let doc = parse_document("; header\n(a ; trailing\n b)").unwrap();
        assert_eq!(doc.as_list().unwrap().len(), 2);
    }

    #[test]
    fn rejects_trailing_expressions() {
        assert!(matches!(parse_document("(a) (b)"), Err(SexprError::TrailingContent { .. })));
    }

    #[test]
    fn rejects_unclosed_parens() {
        assert!(matches!(parse_document("(a (b)"), Err(SexprError::UnclosedParen { .. })));
    }

    #[test]
    fn rejects_empty_documents() {
        assert!(matches!(parse_document("; nothing here\n"), Err(SexprError::Empty)));
    }

    #[test]
    fn display_round_trips() {
        let text = "(theory (sorts (sort s (a b))) (sentences (or p q)))";
        let doc = parse_document(text).unwrap();
        assert_eq!(doc.to_string(), text);
    }
}
