//! Guard expression grammar.
//!
//! ```text
//! or    := and ("or" and)*
//! and   := unary ("and" unary)*
//! unary := "not" unary | "(" or ")" | "true" | "false" | term (cmpop term)?
//! term  := ident | ["-"] digits
//! cmpop := "<" | "<=" | ">" | ">=" | "==" | "!=" | "≤" | "≥" | "≠"
//! ```
//!
//! `not` applies to a whole comparison: `not n < 3` is `not (n < 3)`.

use super::{ParseError, SourceSpan};
use crate::id::Id;
use crate::model::{CmpOp, GuardExpr, Term};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Op(CmpOp),
    LParen,
    RParen,
    And,
    Or,
    Not,
    True,
    False,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    col: usize,
    len: usize,
}

/// Parses a guard expression. Spans are reported on line 1, counting
/// columns from 1 in characters.
pub fn parse_guard(text: &str) -> Result<GuardExpr, ParseError> {
    parse_guard_at(text, 1, 1)
}

pub(crate) fn parse_guard_at(
    text: &str,
    line: usize,
    col0: usize,
) -> Result<GuardExpr, ParseError> {
    let toks = lex(text, line, col0)?;
    let end_col = col0 + text.chars().count();
    let mut p = Parser {
        toks,
        pos: 0,
        line,
        end_col,
    };
    if p.toks.is_empty() {
        return Err(p.error_here("empty guard expression"));
    }
    let e = p.or_expr()?;
    if p.pos < p.toks.len() {
        return Err(p.error_here("unexpected token after expression"));
    }
    Ok(e)
}

fn lex(text: &str, line: usize, col0: usize) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |i: usize, len: usize, msg: &str| ParseError::Syntax {
        span: SourceSpan::new(line, col0 + i, len),
        message: msg.to_owned(),
    };
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let tok = if c.is_whitespace() {
            i += 1;
            continue;
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            match word.as_str() {
                "and" => Tok::And,
                "or" => Tok::Or,
                "not" => Tok::Not,
                "true" => Tok::True,
                "false" => Tok::False,
                _ => Tok::Ident(word),
            }
        } else if c.is_ascii_digit()
            || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            i += 1;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let lit: String = chars[start..i].iter().collect();
            let n = lit
                .parse::<i64>()
                .map_err(|_| err(start, i - start, "integer literal out of range"))?;
            Tok::Int(n)
        } else {
            let next = chars.get(i + 1).copied();
            let (tok, width) = match (c, next) {
                ('<', Some('=')) => (Tok::Op(CmpOp::Le), 2),
                ('>', Some('=')) => (Tok::Op(CmpOp::Ge), 2),
                ('=', Some('=')) => (Tok::Op(CmpOp::Eq), 2),
                ('!', Some('=')) => (Tok::Op(CmpOp::Ne), 2),
                ('<', _) => (Tok::Op(CmpOp::Lt), 1),
                ('>', _) => (Tok::Op(CmpOp::Gt), 1),
                ('≤', _) => (Tok::Op(CmpOp::Le), 1),
                ('≥', _) => (Tok::Op(CmpOp::Ge), 1),
                ('≠', _) => (Tok::Op(CmpOp::Ne), 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                _ => return Err(err(i, 1, &format!("unexpected character `{c}`"))),
            };
            i += width;
            tok
        };
        out.push(Spanned {
            tok,
            col: col0 + start,
            len: i - start,
        });
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    line: usize,
    end_col: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn error_here(&self, msg: &str) -> ParseError {
        let (col, len) = match self.toks.get(self.pos) {
            Some(s) => (s.col, s.len),
            None => (self.end_col, 0),
        };
        ParseError::Syntax {
            span: SourceSpan::new(self.line, col, len),
            message: msg.to_owned(),
        }
    }

    fn or_expr(&mut self) -> Result<GuardExpr, ParseError> {
        let mut lhs = self.and_expr()?;
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            let rhs = self.and_expr()?;
            lhs = GuardExpr::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<GuardExpr, ParseError> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = GuardExpr::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<GuardExpr, ParseError> {
        match self.peek() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(GuardExpr::negate(self.unary()?))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.or_expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(self.error_here("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(Tok::True) => {
                self.pos += 1;
                Ok(GuardExpr::Bool(true))
            }
            Some(Tok::False) => {
                self.pos += 1;
                Ok(GuardExpr::Bool(false))
            }
            Some(Tok::Ident(_)) | Some(Tok::Int(_)) => {
                let lhs = self.term()?;
                if let Some(Tok::Op(op)) = self.peek() {
                    let op = *op;
                    self.pos += 1;
                    let rhs = self.term()?;
                    return Ok(GuardExpr::cmp(op, lhs, rhs));
                }
                match lhs {
                    Term::Var(v) => Ok(GuardExpr::Truthy(v)),
                    Term::Int(_) => {
                        self.pos -= 1;
                        Err(self.error_here("integer literal is not a condition"))
                    }
                }
            }
            _ => Err(self.error_here("expected a condition")),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let t = match self.peek() {
            Some(Tok::Ident(s)) => Term::Var(Id::from(s.as_str())),
            Some(Tok::Int(n)) => Term::Int(*n),
            _ => return Err(self.error_here("expected a variable or integer")),
        };
        self.pos += 1;
        Ok(t)
    }
}
