//! Recursive-descent parser for the expression grammar
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := atom ['^' integer]
//! atom   := number | identifier | '(' expr ')' | '-' atom
//! ```
//!
//! Numbers are integers, decimals (`0.5`) or integer ratios (`1/3`); all are
//! read exactly. Note that `-` binds tighter than `^`, so `-x^2` is `(-x)^2`.

use num::{BigInt, BigRational, Zero};

use super::{Expr, ExprError, VarSpace};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn syntax(&self, position: usize, message: impl Into<String>) -> ExprError {
        ExprError::Syntax {
            position: position + 1,
            message: message.into(),
        }
    }

    /// Next token and its 0-based byte offset.
    fn next(&mut self) -> Result<(Tok, usize), ExprError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = bytes.get(self.pos) else {
            return Ok((Tok::End, start));
        };
        let single = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            self.pos += 1;
            return Ok((tok, start));
        }
        if c.is_ascii_digit() {
            return self.number(start).map(|n| (Tok::Num(n), start));
        }
        if c.is_ascii_alphabetic() {
            while self.pos < bytes.len()
                && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_')
            {
                self.pos += 1;
            }
            return Ok((Tok::Ident(self.src[start..self.pos].to_string()), start));
        }
        let ch = self.src[start..].chars().next().unwrap_or('?');
        Err(self.syntax(start, format!("unexpected character {ch:?}")))
    }

    fn digits(&mut self) -> &'a str {
        let bytes = self.src.as_bytes();
        let start = self.pos;
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        &self.src[start..self.pos]
    }

    fn number(&mut self, start: usize) -> Result<BigRational, ExprError> {
        let bytes = self.src.as_bytes();
        let int_part = self.digits();
        let mut value = BigRational::from_integer(int_part.parse::<BigInt>().expect("digits"));
        if bytes.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            let frac = self.digits();
            if frac.is_empty() {
                return Err(self.syntax(self.pos, "expected digits after '.'"));
            }
            let scale = BigInt::from(10u8).pow(frac.len() as u32);
            let frac_val = BigRational::new(frac.parse::<BigInt>().expect("digits"), scale);
            value += frac_val;
        } else if bytes.get(self.pos) == Some(&b'/')
            && bytes.get(self.pos + 1).is_some_and(u8::is_ascii_digit)
        {
            self.pos += 1;
            let den: BigInt = self.digits().parse().expect("digits");
            if den.is_zero() {
                return Err(self.syntax(start, "zero denominator in rational literal"));
            }
            value /= BigRational::from_integer(den);
        }
        Ok(value)
    }
}

struct Parser<'a, 'v> {
    lexer: Lexer<'a>,
    tok: Tok,
    tok_pos: usize,
    vars: Option<&'v VarSpace>,
}

impl<'a, 'v> Parser<'a, 'v> {
    fn new(src: &'a str, vars: Option<&'v VarSpace>) -> Result<Self, ExprError> {
        let mut lexer = Lexer { src, pos: 0 };
        let (tok, tok_pos) = lexer.next()?;
        Ok(Parser {
            lexer,
            tok,
            tok_pos,
            vars,
        })
    }

    fn bump(&mut self) -> Result<Tok, ExprError> {
        let (next, pos) = self.lexer.next()?;
        self.tok_pos = pos;
        Ok(std::mem::replace(&mut self.tok, next))
    }

    fn error(&self, message: impl Into<String>) -> ExprError {
        self.lexer.syntax(self.tok_pos, message)
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.tok {
                Tok::Plus => {
                    self.bump()?;
                    terms.push(self.term()?);
                }
                Tok::Minus => {
                    self.bump()?;
                    terms.push(Expr::negation(self.term()?));
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().expect("one term")
        } else {
            Expr::add(terms)
        })
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut factors = vec![self.factor()?];
        while self.tok == Tok::Star {
            self.bump()?;
            factors.push(self.factor()?);
        }
        Ok(if factors.len() == 1 {
            factors.pop().expect("one factor")
        } else {
            Expr::mul(factors)
        })
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.tok != Tok::Caret {
            return Ok(base);
        }
        self.bump()?;
        let pos = self.tok_pos;
        match self.bump()? {
            Tok::Num(n) if n.is_integer() => {
                let exp = u32::try_from(n.to_integer())
                    .map_err(|_| self.lexer.syntax(pos, "exponent too large"))?;
                Ok(Expr::pow(base, exp))
            }
            _ => Err(self
                .lexer
                .syntax(pos, "exponent must be a nonnegative integer")),
        }
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let pos = self.tok_pos;
        match self.bump()? {
            Tok::Num(n) => Ok(Expr::constant(n)),
            Tok::Ident(name) => {
                if let Some(vars) = self.vars {
                    if !vars.contains(&name) {
                        return Err(ExprError::UndeclaredVariable {
                            name,
                            position: pos + 1,
                        });
                    }
                }
                Ok(Expr::var(&name))
            }
            Tok::LParen => {
                let inner = self.expr()?;
                if self.tok != Tok::RParen {
                    return Err(self.error("expected ')'"));
                }
                self.bump()?;
                Ok(inner)
            }
            Tok::Minus => Ok(Expr::negation(self.atom()?)),
            Tok::End => Err(self.lexer.syntax(pos, "unexpected end of input")),
            other => Err(self
                .lexer
                .syntax(pos, format!("unexpected token {other:?}"))),
        }
    }
}

/// Parses into the raw (unsimplified) tree.
pub(crate) fn parse_raw(text: &str, vars: Option<&VarSpace>) -> Result<Expr, ExprError> {
    let mut p = Parser::new(text, vars)?;
    let e = p.expr()?;
    if p.tok != Tok::End {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

/// Exact rational literal: integer, decimal or `p/q`, optionally signed.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let trimmed = text.trim();
    let (neg, body) = match trimmed.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, trimmed),
    };
    if !body.starts_with(|c: char| c.is_ascii_digit()) {
        return None;
    }
    let mut lexer = Lexer { src: body, pos: 0 };
    let value = match lexer.next().ok()? {
        (Tok::Num(n), _) => n,
        _ => return None,
    };
    if !matches!(lexer.next().ok()?, (Tok::End, _)) {
        return None;
    }
    Some(if neg { -value } else { value })
}
