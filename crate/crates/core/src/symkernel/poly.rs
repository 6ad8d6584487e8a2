use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Zero};

use super::monomial::Monomial;
use super::rational::{format_rational, Rational};
use super::table::{same_table, Sym, VarTable};
use crate::error::{Error, Result};

/// Sparse multivariate polynomial with exact rational coefficients.
///
/// Terms are kept sorted ascending in graded-lex order with no zero
/// coefficients, so structural equality is polynomial equality.
#[derive(Clone)]
pub struct Polynomial {
    table: Arc<VarTable>,
    terms: Vec<(Monomial, Rational)>,
}

impl Polynomial {
    pub fn zero(table: &Arc<VarTable>) -> Polynomial {
        Polynomial { table: table.clone(), terms: Vec::new() }
    }

    pub fn one(table: &Arc<VarTable>) -> Polynomial {
        Polynomial::constant(table, Rational::one())
    }

    pub fn constant(table: &Arc<VarTable>, c: Rational) -> Polynomial {
        Polynomial::monomial(table, Monomial::ONE, c)
    }

    pub fn var(table: &Arc<VarTable>, s: Sym) -> Polynomial {
        Polynomial::monomial(table, Monomial::var(s, 1), Rational::one())
    }

    pub fn monomial(table: &Arc<VarTable>, m: Monomial, c: Rational) -> Polynomial {
        let terms = if c.is_zero() { Vec::new() } else { vec![(m, c)] };
        Polynomial { table: table.clone(), terms }
    }

    /// Builds a polynomial from arbitrary terms, combining duplicates.
    pub fn from_terms(table: &Arc<VarTable>, terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Polynomial {
        let mut acc: HashMap<Monomial, Rational> = HashMap::new();
        for (m, c) in terms {
            *acc.entry(m).or_insert_with(Rational::zero) += c;
        }
        Polynomial::from_map(table, acc)
    }

    pub(crate) fn from_map(table: &Arc<VarTable>, acc: HashMap<Monomial, Rational>) -> Polynomial {
        let mut terms: Vec<(Monomial, Rational)> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by_key(|a| a.0);
        Polynomial { table: table.clone(), terms }
    }

    pub fn table(&self) -> &Arc<VarTable> {
        &self.table
    }

    pub fn terms(&self) -> &[(Monomial, Rational)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0.is_one())
    }

    pub fn constant_value(&self) -> Option<Rational> {
        match self.terms.as_slice() {
            [] => Some(Rational::zero()),
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn is_one(&self) -> bool {
        matches!(self.terms.as_slice(), [(m, c)] if m.is_one() && c.is_one())
    }

    /// Leading term under the graded-lex order.
    pub fn leading(&self) -> Option<&(Monomial, Rational)> {
        self.terms.last()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.last().map(|(m, _)| m.degree()).unwrap_or(0)
    }

    pub fn degree_in(&self, s: Sym) -> u32 {
        self.terms.iter().map(|(m, _)| m.exponent(s)).max().unwrap_or(0)
    }

    pub fn degree_in_set(&self, syms: &[Sym]) -> u32 {
        self.terms.iter().map(|(m, _)| m.degree_in(syms)).max().unwrap_or(0)
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms
            .binary_search_by(|(k, _)| k.cmp(m))
            .map(|i| self.terms[i].1.clone())
            .unwrap_or_else(|_| Rational::zero())
    }

    /// Symbols with a nonzero exponent somewhere in the polynomial.
    pub fn symbols(&self) -> Vec<Sym> {
        let mut seen = [false; super::table::MAX_VARS];
        for (m, _) in &self.terms {
            for (s, _) in m.support() {
                seen[s.index()] = true;
            }
        }
        seen.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| Sym(i as u8)).collect()
    }

    /// Coefficients of `self` as a polynomial in `s`: entry `k` multiplies `s^k`.
    pub fn coefficients_in(&self, s: Sym) -> Vec<Polynomial> {
        let n = self.degree_in(s) as usize;
        let mut parts: Vec<HashMap<Monomial, Rational>> = vec![HashMap::new(); n + 1];
        for (m, c) in &self.terms {
            let e = m.exponent(s);
            parts[e as usize].insert(m.with_exponent(s, 0), c.clone());
        }
        parts.into_iter().map(|acc| Polynomial::from_map(&self.table, acc)).collect()
    }

    pub fn contains(&self, s: Sym) -> bool {
        self.terms.iter().any(|(m, _)| m.exponent(s) > 0)
    }

    fn check(&self, other: &Polynomial) -> Result<()> {
        if same_table(&self.table, &other.table) {
            Ok(())
        } else {
            Err(Error::TableMismatch)
        }
    }

    pub fn checked_add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check(other)?;
        Ok(self.merge(other, false))
    }

    pub fn checked_sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check(other)?;
        Ok(self.merge(other, true))
    }

    fn merge(&self, other: &Polynomial, negate: bool) -> Polynomial {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let a = &self.terms;
        let b = &other.terms;
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    let c = if negate { -b[j].1.clone() } else { b[j].1.clone() };
                    out.push((b[j].0, c));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = if negate { &a[i].1 - &b[j].1 } else { &a[i].1 + &b[j].1 };
                    if !c.is_zero() {
                        out.push((a[i].0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        for (m, c) in &b[j..] {
            out.push((*m, if negate { -c.clone() } else { c.clone() }));
        }
        Polynomial { table: self.table.clone(), terms: out }
    }

    pub fn checked_mul(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() || other.is_zero() {
            return Polynomial::zero(&self.table);
        }
        if let Some(c) = self.constant_value() {
            return other.scale(&c);
        }
        if let Some(c) = other.constant_value() {
            return self.scale(&c);
        }
        if other.terms.len() == 1 {
            let (m, c) = &other.terms[0];
            return self.mul_term(m, c);
        }
        if self.terms.len() == 1 {
            let (m, c) = &self.terms[0];
            return other.mul_term(m, c);
        }
        let mut acc: HashMap<Monomial, Rational> = HashMap::with_capacity(self.terms.len() * other.terms.len() / 2 + 1);
        mul_accumulate(&mut acc, &self.terms, &other.terms, None);
        Polynomial::from_map(&self.table, acc)
    }

    /// Multiplies by a single term; order is preserved so no sort is needed.
    pub fn mul_term(&self, m: &Monomial, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(&self.table);
        }
        let terms = self.terms.iter().map(|(k, v)| (k.mul(m), v * c)).collect();
        Polynomial { table: self.table.clone(), terms }
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(&self.table);
        }
        if c.is_one() {
            return self.clone();
        }
        let terms = self.terms.iter().map(|(m, v)| (*m, v * c)).collect();
        Polynomial { table: self.table.clone(), terms }
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut result = Polynomial::one(&self.table);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_unchecked(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_unchecked(&base);
            }
        }
        result
    }

    pub fn differentiate(&self, s: Sym) -> Polynomial {
        let mut terms = Vec::new();
        for (m, c) in &self.terms {
            let e = m.exponent(s);
            if e > 0 {
                terms.push((m.with_exponent(s, e - 1), c * Rational::from_integer(e.into())));
            }
        }
        // differentiation can reorder terms of different original degree
        terms.sort_unstable_by_key(|a| a.0);
        Polynomial { table: self.table.clone(), terms }
    }

    /// Greatest monomial dividing every term (the one monomial for zero).
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.iter();
        let Some((first, _)) = it.next() else {
            return Monomial::ONE;
        };
        let mut g = *first;
        for (m, _) in it {
            if g.is_one() {
                break;
            }
            g = g.gcd(m);
        }
        g
    }

    /// Exact division by a monomial that divides every term.
    pub fn div_monomial(&self, m: &Monomial) -> Option<Polynomial> {
        if m.is_one() {
            return Some(self.clone());
        }
        let mut terms = Vec::with_capacity(self.terms.len());
        for (k, c) in &self.terms {
            terms.push((k.div(m)?, c.clone()));
        }
        terms.sort_unstable_by_key(|a| a.0);
        Some(Polynomial { table: self.table.clone(), terms })
    }

    /// Returns `q` with `self = q * den`, or `None` when `den` does not divide `self`.
    pub fn exact_divide(&self, den: &Polynomial) -> Result<Option<Polynomial>> {
        self.check(den)?;
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.is_zero() {
            return Ok(Some(Polynomial::zero(&self.table)));
        }
        if let Some(c) = den.constant_value() {
            return Ok(Some(self.scale(&(Rational::one() / c))));
        }
        if den.terms.len() == 1 {
            let (m, c) = &den.terms[0];
            return Ok(self.div_monomial(m).map(|p| p.scale(&(Rational::one() / c))));
        }
        let (lm, lc) = den.leading().expect("nonzero");
        if self.total_degree() < lm.degree() {
            return Ok(None);
        }
        // every variable degree of the divisor must fit
        for s in den.symbols() {
            if self.degree_in(s) < den.degree_in(s) {
                return Ok(None);
            }
        }
        let lc_inv = Rational::one() / lc;
        let tail = &den.terms[..den.terms.len() - 1];
        let mut rem: BTreeMap<Monomial, Rational> = self.terms.iter().cloned().collect();
        let mut quot = Vec::new();
        while let Some((m, c)) = rem.pop_last() {
            let Some(qm) = m.div(lm) else {
                return Ok(None);
            };
            let qc = c * &lc_inv;
            for (dm, dc) in tail {
                let key = qm.mul(dm);
                let delta = &qc * dc;
                match rem.entry(key) {
                    std::collections::btree_map::Entry::Occupied(mut e) => {
                        *e.get_mut() -= delta;
                        if e.get().is_zero() {
                            e.remove();
                        }
                    }
                    std::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(-delta);
                    }
                }
            }
            quot.push((qm, qc));
        }
        quot.reverse();
        Ok(Some(Polynomial { table: self.table.clone(), terms: quot }))
    }

    pub fn divides(&self, other: &Polynomial) -> bool {
        matches!(other.exact_divide(self), Ok(Some(_)))
    }

    /// Simultaneous substitution of polynomial rules.
    pub fn substitute_poly(&self, rules: &[(Sym, Polynomial)]) -> Result<Polynomial> {
        for (_, r) in rules {
            self.check(r)?;
        }
        let syms: Vec<Sym> = rules.iter().map(|(s, _)| *s).collect();
        let mut groups: HashMap<Monomial, Vec<(Monomial, Rational)>> = HashMap::new();
        for (m, c) in &self.terms {
            let (inside, outside) = m.split(&syms);
            groups.entry(inside).or_default().push((outside, c.clone()));
        }
        let mut cache = PowerCache::new(rules.iter().map(|(s, p)| (*s, p.clone())).collect());
        let mut acc: HashMap<Monomial, Rational> = HashMap::new();
        for (inside, outside) in groups {
            let prod = cache.product(&inside, &self.table);
            mul_accumulate(&mut acc, &outside, &prod.terms, None);
        }
        Ok(Polynomial::from_map(&self.table, acc))
    }

    /// Binds some symbols to rational values.
    pub fn evaluate_partial(&self, values: &[(Sym, Rational)]) -> Polynomial {
        let mut acc: HashMap<Monomial, Rational> = HashMap::new();
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut mono = *m;
            for (s, v) in values {
                let e = m.exponent(*s);
                if e > 0 {
                    coeff *= num_traits::pow(v.clone(), e as usize);
                    mono = mono.with_exponent(*s, 0);
                }
            }
            *acc.entry(mono).or_insert_with(Rational::zero) += coeff;
        }
        Polynomial::from_map(&self.table, acc)
    }

    /// Full evaluation; every symbol present must be bound.
    pub fn evaluate(&self, value: impl Fn(Sym) -> Option<Rational>) -> Result<Rational> {
        let syms = self.symbols();
        let mut vals: Vec<(Sym, Vec<Rational>)> = Vec::with_capacity(syms.len());
        for s in syms {
            let v = value(s).ok_or_else(|| Error::Unbound(self.table.name(s).to_string()))?;
            let maxe = self.degree_in(s) as usize;
            let mut pows = Vec::with_capacity(maxe + 1);
            pows.push(Rational::one());
            for k in 1..=maxe {
                let next = &pows[k - 1] * &v;
                pows.push(next);
            }
            vals.push((s, pows));
        }
        let mut total = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (s, pows) in &vals {
                let e = m.exponent(*s) as usize;
                if e > 0 {
                    t *= &pows[e];
                }
            }
            total += t;
        }
        Ok(total)
    }

    pub fn display(&self) -> PolyDisplay<'_> {
        PolyDisplay(self)
    }
}

/// `acc += a * b * scale`
pub(crate) fn mul_accumulate(
    acc: &mut HashMap<Monomial, Rational>,
    a: &[(Monomial, Rational)],
    b: &[(Monomial, Rational)],
    scale: Option<&Rational>,
) {
    for (ma, ca) in a {
        let ca = match scale {
            Some(s) => ca * s,
            None => ca.clone(),
        };
        for (mb, cb) in b {
            let c = &ca * cb;
            match acc.entry(ma.mul(mb)) {
                std::collections::hash_map::Entry::Occupied(mut e) => *e.get_mut() += c,
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(c);
                }
            }
        }
    }
}

/// Memoized powers of substitution images.
pub(crate) struct PowerCache {
    bases: Vec<(Sym, Polynomial)>,
    powers: HashMap<(Sym, u32), Polynomial>,
}

impl PowerCache {
    pub(crate) fn new(bases: Vec<(Sym, Polynomial)>) -> PowerCache {
        PowerCache { bases, powers: HashMap::new() }
    }

    pub(crate) fn power(&mut self, s: Sym, e: u32, table: &Arc<VarTable>) -> Polynomial {
        if e == 0 {
            return Polynomial::one(table);
        }
        if let Some(p) = self.powers.get(&(s, e)) {
            return p.clone();
        }
        let base = self.bases.iter().find(|(k, _)| *k == s).map(|(_, p)| p.clone());
        let base = base.unwrap_or_else(|| Polynomial::var(table, s));
        let p = if e == 1 {
            base
        } else {
            let prev = self.power(s, e - 1, table);
            prev.mul_unchecked(&base)
        };
        self.powers.insert((s, e), p.clone());
        p
    }

    pub(crate) fn product(&mut self, m: &Monomial, table: &Arc<VarTable>) -> Polynomial {
        let mut out = Polynomial::one(table);
        let support: Vec<(Sym, u32)> = m.support().collect();
        for (s, e) in support {
            let p = self.power(s, e, table);
            out = out.mul_unchecked(&p);
        }
        out
    }
}

impl PartialEq for Polynomial {
    fn eq(&self, other: &Self) -> bool {
        same_table(&self.table, &other.table) && self.terms == other.terms
    }
}

impl Eq for Polynomial {}

impl std::hash::Hash for Polynomial {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        for (m, c) in &self.terms {
            m.hash(state);
            c.hash(state);
        }
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial({})", self.display())
    }
}

pub struct PolyDisplay<'a>(&'a Polynomial);

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.0;
        if p.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in p.terms.iter().rev().enumerate() {
            let neg = c < &Rational::zero();
            let mag = if neg { -c.clone() } else { c.clone() };
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            if m.is_one() {
                write!(f, "{}", format_rational(&mag))?;
            } else if mag.is_one() {
                write!(f, "{}", m.display(&p.table))?;
            } else {
                write!(f, "{}*{}", format_rational(&mag), m.display(&p.table))?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.display().fmt(f)
    }
}

macro_rules! poly_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&Polynomial> for &Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: &Polynomial) -> Polynomial {
                self.$checked(rhs).expect("polynomials over different variable tables")
            }
        }
        impl $trait<Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: Polynomial) -> Polynomial {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: &Polynomial) -> Polynomial {
                (&self).$method(rhs)
            }
        }
    };
}

poly_binop!(Add, add, checked_add);
poly_binop!(Sub, sub, checked_sub);
poly_binop!(Mul, mul, checked_mul);

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        let terms = self.terms.iter().map(|(m, c)| (*m, -c.clone())).collect();
        Polynomial { table: self.table.clone(), terms }
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}
