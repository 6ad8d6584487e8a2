use std::sync::Arc;

use num_traits::{One, Zero};
use serde::Serialize;

use super::poly::Polynomial;
use super::ratexpr::RationalExpr;
use super::rational::{format_rational, Rational};
use super::subst::Substitution;
use super::table::{Sym, VarTable};
use crate::error::{Error, Result};

/// `sum c_i * a_i = constant` with one designated eliminated symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineRelation {
    table: Arc<VarTable>,
    coeffs: Vec<(Sym, Rational)>,
    constant: Rational,
    eliminated: Sym,
}

#[derive(Serialize)]
pub struct RelationJson {
    pub lhs: String,
    pub rhs: String,
    pub eliminated: String,
}

impl AffineRelation {
    pub fn new(
        table: &Arc<VarTable>,
        coeffs: Vec<(Sym, Rational)>,
        constant: Rational,
        eliminated: Sym,
    ) -> Result<AffineRelation> {
        let rel = AffineRelation { table: table.clone(), coeffs, constant, eliminated };
        rel.coefficient(eliminated)
            .filter(|c| !c.is_zero())
            .ok_or_else(|| Error::RelationNotSolvable(table.name(eliminated).to_string()))?;
        Ok(rel)
    }

    pub fn eliminated(&self) -> Sym {
        self.eliminated
    }

    pub fn coefficients(&self) -> &[(Sym, Rational)] {
        &self.coeffs
    }

    pub fn constant(&self) -> &Rational {
        &self.constant
    }

    pub fn coefficient(&self, s: Sym) -> Option<Rational> {
        self.coeffs.iter().find(|(k, _)| *k == s).map(|(_, c)| c.clone())
    }

    /// Same relation with a different eliminated symbol.
    pub fn with_eliminated(&self, s: Sym) -> Result<AffineRelation> {
        AffineRelation::new(&self.table, self.coeffs.clone(), self.constant.clone(), s)
    }

    /// `lhs - constant` as a polynomial; zero on the relation.
    pub fn residual_polynomial(&self) -> Polynomial {
        let mut p = Polynomial::constant(&self.table, -self.constant.clone());
        for (s, c) in &self.coeffs {
            p = p + Polynomial::var(&self.table, *s).scale(c);
        }
        p
    }

    /// Expression of `s` in terms of the other parameters.
    pub fn solve_for(&self, s: Sym) -> Result<Polynomial> {
        let c = self
            .coefficient(s)
            .filter(|c| !c.is_zero())
            .ok_or_else(|| Error::RelationNotSolvable(self.table.name(s).to_string()))?;
        let mut p = Polynomial::constant(&self.table, self.constant.clone());
        for (k, ck) in &self.coeffs {
            if *k != s {
                p = p - Polynomial::var(&self.table, *k).scale(ck);
            }
        }
        Ok(p.scale(&(Rational::one() / c)))
    }

    pub fn elimination_rule(&self) -> (Sym, Polynomial) {
        (self.eliminated, self.solve_for(self.eliminated).expect("checked at construction"))
    }

    pub fn reduce_poly(&self, p: &Polynomial) -> Result<Polynomial> {
        if !p.contains(self.eliminated) {
            return Ok(p.clone());
        }
        let (s, rule) = self.elimination_rule();
        p.substitute_poly(&[(s, rule)])
    }

    /// Replaces the eliminated parameter everywhere.
    pub fn reduce(&self, f: &RationalExpr) -> Result<RationalExpr> {
        if !f.contains(self.eliminated) {
            return Ok(f.clone());
        }
        let (s, rule) = self.elimination_rule();
        let sub = Substitution::new(&self.table, &[(s, RationalExpr::from_poly(rule))])?;
        sub.apply(f)
    }

    /// Residual `lhs - constant` at the given values.
    pub fn residual(&self, value: impl Fn(Sym) -> Option<Rational>) -> Result<Rational> {
        let mut r = -self.constant.clone();
        for (s, c) in &self.coeffs {
            let v = value(*s).ok_or_else(|| Error::Unbound(self.table.name(*s).to_string()))?;
            r += c * v;
        }
        Ok(r)
    }

    pub fn check(&self, value: impl Fn(Sym) -> Option<Rational>) -> Result<()> {
        let r = self.residual(value)?;
        if r.is_zero() {
            Ok(())
        } else {
            Err(Error::RelationViolated(format_rational(&r)))
        }
    }

    pub fn to_json(&self) -> RelationJson {
        let mut lhs = Polynomial::zero(&self.table);
        for (s, c) in &self.coeffs {
            lhs = lhs + Polynomial::var(&self.table, *s).scale(c);
        }
        RelationJson {
            lhs: lhs.to_string(),
            rhs: format_rational(&self.constant),
            eliminated: self.table.name(self.eliminated).to_string(),
        }
    }
}

/// Convenience wrapper matching the free-function form.
pub fn reduce_parameters(f: &RationalExpr, relation: &AffineRelation) -> Result<RationalExpr> {
    relation.reduce(f)
}
