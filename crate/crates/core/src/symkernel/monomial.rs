use std::fmt;

use super::table::{Sym, VarTable, MAX_VARS};

/// Exponent vector ordered graded-lexicographically.
///
/// The derived ordering compares total degree first and then the exponent
/// array lexicographically, so the first symbol of the table is the most
/// significant one.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    degree: u16,
    exps: [u8; MAX_VARS],
}

impl Monomial {
    pub const ONE: Monomial = Monomial { degree: 0, exps: [0; MAX_VARS] };

    pub fn var(s: Sym, e: u32) -> Monomial {
        let mut m = Monomial::ONE;
        m.exps[s.index()] = to_u8(e);
        m.degree = e as u16;
        m
    }

    pub fn from_exponents(exps: &[(Sym, u32)]) -> Monomial {
        let mut m = Monomial::ONE;
        for &(s, e) in exps {
            let new = m.exps[s.index()] as u32 + e;
            m.exps[s.index()] = to_u8(new);
        }
        m.degree = m.exps.iter().map(|&e| e as u16).sum();
        m
    }

    pub fn exponent(&self, s: Sym) -> u32 {
        self.exps[s.index()] as u32
    }

    pub fn degree(&self) -> u32 {
        self.degree as u32
    }

    pub fn is_one(&self) -> bool {
        self.degree == 0
    }

    pub fn degree_in(&self, syms: &[Sym]) -> u32 {
        syms.iter().map(|&s| self.exponent(s)).sum()
    }

    /// Nonzero exponents as `(symbol, exponent)` pairs.
    pub fn support(&self) -> impl Iterator<Item = (Sym, u32)> + '_ {
        self.exps.iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, &e)| (Sym(i as u8), e as u32))
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut exps = [0u8; MAX_VARS];
        for ((e, &a), &b) in exps.iter_mut().zip(&self.exps).zip(&other.exps) {
            *e = to_u8(a as u32 + b as u32);
        }
        Monomial { degree: self.degree + other.degree, exps }
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.degree <= other.degree && self.exps.iter().zip(other.exps.iter()).all(|(a, b)| a <= b)
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        if !other.divides(self) {
            return None;
        }
        let mut exps = [0u8; MAX_VARS];
        for ((e, &a), &b) in exps.iter_mut().zip(&self.exps).zip(&other.exps) {
            *e = a - b;
        }
        Some(Monomial { degree: self.degree - other.degree, exps })
    }

    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let mut exps = [0u8; MAX_VARS];
        for ((e, &a), &b) in exps.iter_mut().zip(&self.exps).zip(&other.exps) {
            *e = a.min(b);
        }
        Monomial { degree: exps.iter().map(|&e| e as u16).sum(), exps }
    }

    /// Same monomial with the exponent of `s` replaced.
    pub fn with_exponent(&self, s: Sym, e: u32) -> Monomial {
        let mut m = *self;
        m.degree = m.degree - m.exps[s.index()] as u16 + e as u16;
        m.exps[s.index()] = to_u8(e);
        m
    }

    /// Splits into the part over `syms` and the part over every other symbol.
    pub fn split(&self, syms: &[Sym]) -> (Monomial, Monomial) {
        let mut inside = Monomial::ONE;
        let mut outside = *self;
        for &s in syms {
            let e = self.exponent(s);
            if e > 0 {
                inside = inside.with_exponent(s, e);
                outside = outside.with_exponent(s, 0);
            }
        }
        (inside, outside)
    }

    pub fn display<'a>(&'a self, table: &'a VarTable) -> MonomialDisplay<'a> {
        MonomialDisplay { m: self, table }
    }
}

fn to_u8(e: u32) -> u8 {
    u8::try_from(e).expect("monomial exponent exceeds 255")
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.support().map(|(s, e)| format!("v{}^{}", s.0, e)).collect();
        write!(f, "Monomial({})", parts.join("*"))
    }
}

pub struct MonomialDisplay<'a> {
    m: &'a Monomial,
    table: &'a VarTable,
}

impl fmt::Display for MonomialDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.m.is_one() {
            return write!(f, "1");
        }
        let mut first = true;
        for (s, e) in self.m.support() {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            write!(f, "{}", self.table.name(s))?;
            if e > 1 {
                write!(f, "^{}", e)?;
            }
        }
        Ok(())
    }
}
