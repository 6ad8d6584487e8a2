use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use super::monomial::Monomial;
use super::poly::Polynomial;
use super::rational::Rational;
use super::table::{Sym, VarTable};
use crate::error::{Error, Result};

/// Quotient of two polynomials kept in a light canonical form.
///
/// Common monomial factors and scalars are cancelled and the leading
/// coefficient of the denominator is one. When the denominator divides the
/// numerator exactly the expression collapses to a polynomial. No
/// polynomial GCD is taken, so equal functions may still have different
/// representations; compare with [`RationalExpr::equals`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalExpr {
    num: Polynomial,
    den: Polynomial,
}

impl RationalExpr {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<RationalExpr> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        if !super::table::same_table(num.table(), den.table()) {
            return Err(Error::TableMismatch);
        }
        Ok(RationalExpr::canonical(num, den))
    }

    fn canonical(num: Polynomial, den: Polynomial) -> RationalExpr {
        if num.is_zero() {
            let t = num.table().clone();
            return RationalExpr { num: Polynomial::zero(&t), den: Polynomial::one(&t) };
        }
        if let Some(c) = den.constant_value() {
            let t = num.table().clone();
            return RationalExpr { num: num.scale(&(Rational::one() / c)), den: Polynomial::one(&t) };
        }
        let g = num.monomial_content().gcd(&den.monomial_content());
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (num.div_monomial(&g).expect("content"), den.div_monomial(&g).expect("content"))
        };
        if den.len() > 1 {
            if let Ok(Some(q)) = num.exact_divide(&den) {
                let t = q.table().clone();
                return RationalExpr { num: q, den: Polynomial::one(&t) };
            }
        }
        let lc = den.leading().expect("nonzero").1.clone();
        if lc.is_one() {
            RationalExpr { num, den }
        } else {
            let inv = Rational::one() / lc;
            RationalExpr { num: num.scale(&inv), den: den.scale(&inv) }
        }
    }

    pub fn from_poly(p: Polynomial) -> RationalExpr {
        let t = p.table().clone();
        RationalExpr { num: p, den: Polynomial::one(&t) }
    }

    pub fn zero(table: &Arc<VarTable>) -> RationalExpr {
        RationalExpr::from_poly(Polynomial::zero(table))
    }

    pub fn one(table: &Arc<VarTable>) -> RationalExpr {
        RationalExpr::from_poly(Polynomial::one(table))
    }

    pub fn constant(table: &Arc<VarTable>, c: Rational) -> RationalExpr {
        RationalExpr::from_poly(Polynomial::constant(table, c))
    }

    pub fn var(table: &Arc<VarTable>, s: Sym) -> RationalExpr {
        RationalExpr::from_poly(Polynomial::var(table, s))
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn into_parts(self) -> (Polynomial, Polynomial) {
        (self.num, self.den)
    }

    pub fn table(&self) -> &Arc<VarTable> {
        self.num.table()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_polynomial(&self) -> Option<&Polynomial> {
        self.den.is_one().then_some(&self.num)
    }

    /// Polynomial value when the denominator divides the numerator.
    pub fn to_polynomial(&self) -> Result<Option<Polynomial>> {
        if self.den.is_one() {
            return Ok(Some(self.num.clone()));
        }
        self.num.exact_divide(&self.den)
    }

    pub fn contains(&self, s: Sym) -> bool {
        self.num.contains(s) || self.den.contains(s)
    }

    pub fn symbols(&self) -> Vec<Sym> {
        let mut v = self.num.symbols();
        v.extend(self.den.symbols());
        v.sort();
        v.dedup();
        v
    }

    pub fn checked_add(&self, other: &RationalExpr) -> Result<RationalExpr> {
        self.add_signed(other, false)
    }

    pub fn checked_sub(&self, other: &RationalExpr) -> Result<RationalExpr> {
        self.add_signed(other, true)
    }

    fn add_signed(&self, other: &RationalExpr, negate: bool) -> Result<RationalExpr> {
        let rhs_num = if negate { -&other.num } else { other.num.clone() };
        if self.den == other.den {
            let n = self.num.checked_add(&rhs_num)?;
            return Ok(RationalExpr::canonical(n, self.den.clone()));
        }
        if other.den.is_one() {
            let n = self.num.checked_add(&rhs_num.checked_mul(&self.den)?)?;
            return Ok(RationalExpr::canonical(n, self.den.clone()));
        }
        if self.den.is_one() {
            let n = self.num.checked_mul(&other.den)?.checked_add(&rhs_num)?;
            return Ok(RationalExpr::canonical(n, other.den.clone()));
        }
        if let Some(k) = self.den.exact_divide(&other.den)? {
            let n = self.num.checked_add(&rhs_num.checked_mul(&k)?)?;
            return Ok(RationalExpr::canonical(n, self.den.clone()));
        }
        if let Some(k) = other.den.exact_divide(&self.den)? {
            let n = self.num.checked_mul(&k)?.checked_add(&rhs_num)?;
            return Ok(RationalExpr::canonical(n, other.den.clone()));
        }
        let n = self.num.checked_mul(&other.den)?.checked_add(&rhs_num.checked_mul(&self.den)?)?;
        let d = self.den.checked_mul(&other.den)?;
        Ok(RationalExpr::canonical(n, d))
    }

    pub fn checked_mul(&self, other: &RationalExpr) -> Result<RationalExpr> {
        if self.den.is_one() && other.den.is_one() {
            return Ok(RationalExpr::from_poly(self.num.checked_mul(&other.num)?));
        }
        // cancel a denominator against the opposite numerator when it divides
        let (mut n1, mut d2) = (self.num.clone(), other.den.clone());
        if !d2.is_one() {
            if let Some(q) = n1.exact_divide(&d2)? {
                n1 = q;
                d2 = Polynomial::one(self.table());
            }
        }
        let (mut n2, mut d1) = (other.num.clone(), self.den.clone());
        if !d1.is_one() {
            if let Some(q) = n2.exact_divide(&d1)? {
                n2 = q;
                d1 = Polynomial::one(self.table());
            }
        }
        let n = n1.checked_mul(&n2)?;
        let d = d1.checked_mul(&d2)?;
        Ok(RationalExpr::canonical(n, d))
    }

    pub fn checked_div(&self, other: &RationalExpr) -> Result<RationalExpr> {
        self.checked_mul(&other.recip()?)
    }

    pub fn recip(&self) -> Result<RationalExpr> {
        if self.num.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(RationalExpr::canonical(self.den.clone(), self.num.clone()))
    }

    pub fn scale(&self, c: &Rational) -> RationalExpr {
        RationalExpr::canonical(self.num.scale(c), self.den.clone())
    }

    pub fn neg(&self) -> RationalExpr {
        RationalExpr { num: -&self.num, den: self.den.clone() }
    }

    pub fn pow(&self, e: i32) -> Result<RationalExpr> {
        let base = if e < 0 { self.recip()? } else { self.clone() };
        let k = e.unsigned_abs();
        Ok(RationalExpr::canonical(base.num.pow(k), base.den.pow(k)))
    }

    /// Quotient rule; the result is canonicalized.
    pub fn differentiate(&self, s: Sym) -> Result<RationalExpr> {
        if !self.table().contains(s) {
            return Err(Error::UnknownSymbol(format!("#{}", s.index())));
        }
        let dn = self.num.differentiate(s);
        if !self.den.contains(s) {
            return Ok(RationalExpr::canonical(dn, self.den.clone()));
        }
        let dd = self.den.differentiate(s);
        let n = dn.checked_mul(&self.den)?.checked_sub(&self.num.checked_mul(&dd)?)?;
        let d = self.den.pow(2);
        let r = RationalExpr::canonical(n, d);
        // the denominator squared usually shares one copy with the numerator
        r.cancel_factors(std::slice::from_ref(&self.den))
    }

    /// Trial-divides numerator and denominator by each factor as long as both
    /// remain divisible.
    pub fn cancel_factors(&self, factors: &[Polynomial]) -> Result<RationalExpr> {
        let mut num = self.num.clone();
        let mut den = self.den.clone();
        for f in factors {
            if f.is_constant() || num.is_zero() {
                continue;
            }
            loop {
                if den.is_constant() {
                    break;
                }
                let Some(dq) = den.exact_divide(f)? else { break };
                let Some(nq) = num.exact_divide(f)? else { break };
                num = nq;
                den = dq;
            }
        }
        Ok(RationalExpr::canonical(num, den))
    }

    /// Exact value with every symbol bound; errors at a pole.
    pub fn evaluate(&self, value: impl Fn(Sym) -> Option<Rational> + Copy) -> Result<Rational> {
        let d = self.den.evaluate(value)?;
        if d.is_zero() {
            return Err(Error::SingularPoint);
        }
        Ok(self.num.evaluate(value)? / d)
    }

    pub fn evaluate_partial(&self, values: &[(Sym, Rational)]) -> Result<RationalExpr> {
        let n = self.num.evaluate_partial(values);
        let d = self.den.evaluate_partial(values);
        RationalExpr::new(n, d)
    }

    /// Exact identity test by cross-multiplication.
    pub fn equals(&self, other: &RationalExpr) -> Result<bool> {
        if self.den == other.den {
            return Ok(self.num == other.num);
        }
        let lhs = self.num.checked_mul(&other.den)?;
        let rhs = other.num.checked_mul(&self.den)?;
        Ok(lhs == rhs)
    }

    /// Numerator of `self - other` after cross-multiplication.
    pub fn difference_numerator(&self, other: &RationalExpr) -> Result<Polynomial> {
        if self.den == other.den {
            return self.num.checked_sub(&other.num);
        }
        self.num.checked_mul(&other.den)?.checked_sub(&other.num.checked_mul(&self.den)?)
    }

    /// Denominator is a single monomial (possibly one).
    pub fn monomial_denominator(&self) -> Option<Monomial> {
        match self.den.terms() {
            [(m, _)] => Some(*m),
            _ => None,
        }
    }
}

impl fmt::Display for RationalExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            return write!(f, "{}", self.num);
        }
        let single_power = match self.den.terms() {
            [(m, c)] => c.is_one() && m.support().count() == 1,
            _ => false,
        };
        let wrap_den = !single_power;
        let den = if wrap_den { format!("({})", self.den) } else { self.den.to_string() };
        write!(f, "({})/{}", self.num, den)
    }
}

impl fmt::Debug for RationalExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RationalExpr({self})")
    }
}

impl From<Polynomial> for RationalExpr {
    fn from(p: Polynomial) -> Self {
        RationalExpr::from_poly(p)
    }
}

macro_rules! rat_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl std::ops::$trait<&RationalExpr> for &RationalExpr {
            type Output = RationalExpr;
            fn $method(self, rhs: &RationalExpr) -> RationalExpr {
                self.$checked(rhs).expect("rational expression arithmetic failed")
            }
        }
        impl std::ops::$trait<RationalExpr> for RationalExpr {
            type Output = RationalExpr;
            fn $method(self, rhs: RationalExpr) -> RationalExpr {
                (&self).$method(&rhs)
            }
        }
    };
}

rat_binop!(Add, add, checked_add);
rat_binop!(Sub, sub, checked_sub);
rat_binop!(Mul, mul, checked_mul);
rat_binop!(Div, div, checked_div);

impl std::ops::Neg for &RationalExpr {
    type Output = RationalExpr;
    fn neg(self) -> RationalExpr {
        RationalExpr::neg(self)
    }
}
