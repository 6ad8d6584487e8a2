use std::sync::Arc;

use serde::Serialize;

use super::poly::Polynomial;
use super::ratexpr::RationalExpr;
use super::table::{same_table, Sym, SymbolClass, VarTable};
use crate::error::{Error, Result};

/// Coordinate/momentum pairs fixing the sign of the Poisson bracket.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalStructure {
    table: Arc<VarTable>,
    pairs: Vec<(Sym, Sym)>,
}

#[derive(Serialize)]
struct PairJson<'a> {
    coordinate: &'a str,
    momentum: &'a str,
}

impl CanonicalStructure {
    /// Every dynamical symbol of the table must appear in exactly one pair.
    pub fn new(table: &Arc<VarTable>, pairs: &[(Sym, Sym)]) -> Result<CanonicalStructure> {
        let mut used: Vec<Sym> = Vec::new();
        for &(q, p) in pairs {
            for s in [q, p] {
                if !table.contains(s) {
                    return Err(Error::UnknownSymbol(format!("#{}", s.index())));
                }
                if used.contains(&s) {
                    return Err(Error::InvalidStructure(format!("`{}` appears in two pairs", table.name(s))));
                }
                if table.class(s) != SymbolClass::Dynamical {
                    return Err(Error::InvalidStructure(format!("`{}` is not a dynamical symbol", table.name(s))));
                }
                used.push(s);
            }
        }
        for s in table.of_class(SymbolClass::Dynamical) {
            if !used.contains(&s) {
                return Err(Error::Unpaired(table.name(s).to_string()));
            }
        }
        Ok(CanonicalStructure { table: table.clone(), pairs: pairs.to_vec() })
    }

    pub fn from_names(table: &Arc<VarTable>, pairs: &[(&str, &str)]) -> Result<CanonicalStructure> {
        let syms: Result<Vec<(Sym, Sym)>> = pairs.iter().map(|(q, p)| Ok((table.sym(q)?, table.sym(p)?))).collect();
        CanonicalStructure::new(table, &syms?)
    }

    pub fn pairs(&self) -> &[(Sym, Sym)] {
        &self.pairs
    }

    pub fn table(&self) -> &Arc<VarTable> {
        &self.table
    }

    /// Dynamical symbols in pair order: q1, p1, q2, p2, ...
    pub fn variables(&self) -> Vec<Sym> {
        self.pairs.iter().flat_map(|&(q, p)| [q, p]).collect()
    }

    /// Conjugate of a dynamical symbol and whether it is the coordinate.
    pub fn partner(&self, s: Sym) -> Option<(Sym, bool)> {
        self.pairs.iter().find_map(|&(q, p)| {
            if q == s {
                Some((p, true))
            } else if p == s {
                Some((q, false))
            } else {
                None
            }
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let v: Vec<PairJson<'_>> = self
            .pairs
            .iter()
            .map(|&(q, p)| PairJson { coordinate: self.table.name(q), momentum: self.table.name(p) })
            .collect();
        serde_json::to_value(v).expect("serializable")
    }
}

/// `{f, g} = sum over pairs of df/dp dg/dq - df/dq dg/dp`.
pub fn poisson_bracket(f: &RationalExpr, g: &RationalExpr, s: &CanonicalStructure) -> Result<RationalExpr> {
    if !same_table(f.table(), s.table()) || !same_table(g.table(), s.table()) {
        return Err(Error::TableMismatch);
    }
    if let (Some(fp), Some(gp)) = (f.as_polynomial(), g.as_polynomial()) {
        return Ok(RationalExpr::from_poly(poisson_bracket_poly(fp, gp, s)?));
    }
    let mut acc = RationalExpr::zero(f.table());
    for &(q, p) in s.pairs() {
        let term = f.differentiate(p)?.checked_mul(&g.differentiate(q)?)?;
        let term = term.checked_sub(&f.differentiate(q)?.checked_mul(&g.differentiate(p)?)?)?;
        acc = acc.checked_add(&term)?;
    }
    Ok(acc)
}

pub fn poisson_bracket_poly(f: &Polynomial, g: &Polynomial, s: &CanonicalStructure) -> Result<Polynomial> {
    if !same_table(f.table(), s.table()) || !same_table(g.table(), s.table()) {
        return Err(Error::TableMismatch);
    }
    let mut acc = Polynomial::zero(f.table());
    for &(q, p) in s.pairs() {
        acc = acc + f.differentiate(p) * g.differentiate(q) - f.differentiate(q) * g.differentiate(p);
    }
    Ok(acc)
}
