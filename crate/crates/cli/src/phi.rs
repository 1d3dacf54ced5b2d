//! An infix reader for query formulas given on the command line.
//!
//! Documents keep formulas as explicit trees; command-line arguments would
//! be unreadable that way, so `--phi` and `--evidence` accept the same
//! infix syntax formulas print in: `!`, `&`, `|`, `->`, `<->`, parentheses,
//! `true`/`false`, and ground atoms like `grades(A, B, 7)`.  Precedence
//! from loosest to tightest is `<->`, `->`, `|`, `&`, `!`; implication
//! associates to the right.  Atoms are checked against the vocabulary as
//! they are read.

use std::fmt;

use coarsen::{Formula, GroundAtom, Vocabulary};
use thiserror::Error;

/// A reader failure, pointing at a column of the argument text.
#[derive(Debug, Error)]
#[error("column {col}: {msg}")]
pub struct PhiError {
    pub col: usize,
    pub msg: String,
}

fn err(col: usize, msg: impl Into<String>) -> PhiError {
    PhiError { col, msg: msg.into() }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Open,
    Close,
    Comma,
    Not,
    And,
    Or,
    Implies,
    Equiv,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Ident(name) => write!(f, "`{name}`"),
            Token::Open => write!(f, "`(`"),
            Token::Close => write!(f, "`)`"),
            Token::Comma => write!(f, "`,`"),
            Token::Not => write!(f, "`!`"),
            Token::And => write!(f, "`&`"),
            Token::Or => write!(f, "`|`"),
            Token::Implies => write!(f, "`->`"),
            Token::Equiv => write!(f, "`<->`"),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<(Token, usize)>, PhiError> {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut at = 0;
    while at < bytes.len() {
        let col = at + 1;
        match bytes[at] {
            b' ' | b'\t' => at += 1,
            b'(' => {
                tokens.push((Token::Open, col));
                at += 1;
            }
            b')' => {
                tokens.push((Token::Close, col));
                at += 1;
            }
            b',' => {
                tokens.push((Token::Comma, col));
                at += 1;
            }
            b'!' => {
                tokens.push((Token::Not, col));
                at += 1;
            }
            b'&' => {
                tokens.push((Token::And, col));
                at += 1;
            }
            b'|' => {
                tokens.push((Token::Or, col));
                at += 1;
            }
            b'-' => {
                if bytes.get(at + 1) == Some(&b'>') {
                    tokens.push((Token::Implies, col));
                    at += 2;
                } else {
                    return Err(err(col, "expected `->`"));
                }
            }
            b'<' => {
                if bytes.get(at + 1) == Some(&b'-') && bytes.get(at + 2) == Some(&b'>') {
                    tokens.push((Token::Equiv, col));
                    at += 3;
                } else {
                    return Err(err(col, "expected `<->`"));
                }
            }
            c if c.is_ascii_alphanumeric() || c == b'_' => {
                let start = at;
                while at < bytes.len()
                    && (bytes[at].is_ascii_alphanumeric() || bytes[at] == b'_')
                {
                    at += 1;
                }
                tokens.push((Token::Ident(src[start..at].to_string()), col));
            }
            other => {
                return Err(err(col, format!("unexpected character `{}`", other as char)));
            }
        }
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<(Token, usize)>,
    at: usize,
    end_col: usize,
    vocab: &'a Vocabulary,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.at).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.tokens.get(self.at).map_or(self.end_col, |(_, col)| *col)
    }

    fn bump(&mut self) -> Option<Token> {
        let token = self.tokens.get(self.at).map(|(t, _)| t.clone());
        self.at += 1;
        token
    }

    fn eat(&mut self, token: &Token) -> bool {
        if self.peek() == Some(token) {
            self.at += 1;
            return true;
        }
        false
    }

    // equiv := implies ("<->" implies)*, pairing to the right
    fn equiv(&mut self) -> Result<Formula, PhiError> {
        let lhs = self.implies()?;
        if self.eat(&Token::Equiv) {
            let rhs = self.equiv()?;
            return Ok(Formula::equiv(lhs, rhs));
        }
        Ok(lhs)
    }

    // implies := or ("->" implies)?
    fn implies(&mut self) -> Result<Formula, PhiError> {
        let lhs = self.or()?;
        if self.eat(&Token::Implies) {
            let rhs = self.implies()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, PhiError> {
        let mut parts = vec![self.and()?];
        while self.eat(&Token::Or) {
            parts.push(self.and()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::or(parts) })
    }

    fn and(&mut self) -> Result<Formula, PhiError> {
        let mut parts = vec![self.unary()?];
        while self.eat(&Token::And) {
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::and(parts) })
    }

    fn unary(&mut self) -> Result<Formula, PhiError> {
        if self.eat(&Token::Not) {
            return Ok(Formula::not(self.unary()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula, PhiError> {
        let col = self.col();
        match self.bump() {
            Some(Token::Open) => {
                let inner = self.equiv()?;
                if !self.eat(&Token::Close) {
                    return Err(err(self.col(), "expected `)`"));
                }
                Ok(inner)
            }
            Some(Token::Ident(name)) => match name.as_str() {
                "true" => Ok(Formula::True),
                "false" => Ok(Formula::False),
                _ => self.atom(name, col),
            },
            Some(other) => Err(err(col, format!("expected a formula, found {other}"))),
            None => Err(err(col, "expected a formula")),
        }
    }

    fn atom(&mut self, name: String, col: usize) -> Result<Formula, PhiError> {
        let mut args = Vec::new();
        if self.eat(&Token::Open) {
            loop {
                let arg_col = self.col();
                match self.bump() {
                    Some(Token::Ident(arg)) => args.push(arg),
                    Some(other) => {
                        return Err(err(arg_col, format!("expected a constant, found {other}")))
                    }
                    None => return Err(err(arg_col, "expected a constant")),
                }
                if self.eat(&Token::Close) {
                    break;
                }
                if !self.eat(&Token::Comma) {
                    return Err(err(self.col(), "expected `,` or `)`"));
                }
            }
        }
        let atom = GroundAtom::new(name, args);
        self.vocab.validate_atom(&atom).map_err(|e| err(col, e.to_string()))?;
        Ok(Formula::atom(atom))
    }
}

/// Reads a ground formula in infix syntax, checking atoms against the
/// vocabulary.
pub fn parse_phi(src: &str, vocab: &Vocabulary) -> Result<Formula, PhiError> {
    let tokens = tokenize(src)?;
    let end_col = src.len() + 1;
    let mut parser = Parser { tokens, at: 0, end_col, vocab };
    let formula = parser.equiv()?;
    if parser.at < parser.tokens.len() {
        return Err(err(parser.col(), format!("unexpected {}", parser.tokens[parser.at].0)));
    }
    Ok(formula)
}
