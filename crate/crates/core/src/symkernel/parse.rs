//! Text syntax for expressions: integers, decimals, symbols, `+ - * / ^` and
//! parentheses. Multiplication must be explicit. The `Display` output of
//! [`Polynomial`] and [`RationalExpr`] parses back to the same value.

use std::sync::Arc;

use num_bigint::BigInt;

use super::poly::Polynomial;
use super::ratexpr::RationalExpr;
use super::rational::parse_rational;
use super::table::VarTable;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit()) {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            out.push((start, Tok::Num(src[start..i].to_string())));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(Error::Parse { pos: i, msg: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    table: &'a Arc<VarTable>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos: self.offset(), msg: msg.into() })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<RationalExpr> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc.checked_add(&self.term()?)?;
            } else if self.eat('-') {
                acc = acc.checked_sub(&self.term()?)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<RationalExpr> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc.checked_mul(&self.unary()?)?;
            } else if self.eat('/') {
                let at = self.offset();
                let rhs = self.unary()?;
                if rhs.is_zero() {
                    return Err(Error::Parse { pos: at, msg: "division by zero".into() });
                }
                acc = acc.checked_div(&rhs)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<RationalExpr> {
        if self.eat('-') {
            return Ok(self.unary()?.neg());
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<RationalExpr> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let negative = self.eat('-');
        let e = match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                n.parse::<i32>().or_else(|_| self.err("exponent must be a small integer"))?
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let neg_inner = self.eat('-');
                let n = match self.peek().cloned() {
                    Some(Tok::Num(n)) => n,
                    _ => return self.err("expected integer exponent"),
                };
                self.pos += 1;
                if !self.eat(')') {
                    return self.err("expected `)`");
                }
                let v = n.parse::<i32>().or_else(|_| self.err("exponent must be a small integer"))?;
                if neg_inner {
                    -v
                } else {
                    v
                }
            }
            _ => return self.err("expected integer exponent"),
        };
        let e = if negative { -e } else { e };
        if e < 0 && base.is_zero() {
            return self.err("zero raised to a negative power");
        }
        base.pow(e)
    }

    fn atom(&mut self) -> Result<RationalExpr> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                let v = if n.contains('.') {
                    parse_rational(&n)?
                } else {
                    num_rational::BigRational::from_integer(n.parse::<BigInt>().or_else(|_| self.err("bad integer"))?)
                };
                Ok(RationalExpr::constant(self.table, v))
            }
            Some(Tok::Ident(name)) => {
                let Some(s) = self.table.lookup(&name) else {
                    return Err(Error::UnknownSymbol(name));
                };
                self.pos += 1;
                Ok(RationalExpr::var(self.table, s))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected `)`");
                }
                Ok(e)
            }
            Some(Tok::Op(c)) => self.err(format!("unexpected `{c}`")),
            None => self.err("unexpected end of input"),
        }
    }
}

/// Parses an expression over the symbols of `table`.
pub fn parse_expr(table: &Arc<VarTable>, src: &str) -> Result<RationalExpr> {
    let toks = tokenize(src)?;
    if toks.is_empty() {
        return Err(Error::Parse { pos: 0, msg: "empty expression".into() });
    }
    let mut p = Parser { toks, pos: 0, end: src.len(), table };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

/// Parses an expression that must be a polynomial.
pub fn parse_poly(table: &Arc<VarTable>, src: &str) -> Result<Polynomial> {
    let e = parse_expr(table, src)?;
    e.to_polynomial()?.ok_or_else(|| Error::Parse { pos: 0, msg: format!("`{src}` is not a polynomial") })
}
