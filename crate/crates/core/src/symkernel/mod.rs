//! Exact polynomial and rational-function arithmetic over the rationals.

pub mod bracket;
pub mod identity;
pub mod linalg;
pub mod monomial;
pub mod parse;
pub mod poly;
pub mod ratexpr;
pub mod rational;
pub mod relation;
pub mod subst;
pub mod table;

pub use bracket::{poisson_bracket, poisson_bracket_poly, CanonicalStructure};
pub use identity::{is_identically_equal, IdentityMode, PointSampler};
pub use linalg::{Echelon, SparseRow};
pub use monomial::Monomial;
pub use parse::{parse_expr, parse_poly};
pub use poly::Polynomial;
pub use ratexpr::RationalExpr;
pub use rational::{format_rational, parse_rational, q, qi, to_f64, Rational};
pub use relation::{reduce_parameters, AffineRelation};
pub use subst::{substitute, SubstCache, Substitution};
pub use table::{Sym, SymbolClass, VarTable, MAX_VARS};

use std::sync::Arc;

use crate::error::Result;

/// Differentiates a rational expression; checks the symbol belongs to the table.
pub fn differentiate(f: &RationalExpr, v: Sym) -> Result<RationalExpr> {
    f.differentiate(v)
}

/// Exact multivariate division; `Ok(None)` when not divisible.
pub fn exact_divide(num: &Polynomial, den: &Polynomial) -> Result<Option<Polynomial>> {
    num.exact_divide(den)
}

/// Builds a table from `(name, class)` pairs.
pub fn table(entries: &[(&str, SymbolClass)]) -> Result<Arc<VarTable>> {
    VarTable::new(entries.iter().map(|(n, c)| (n.to_string(), *c)))
}
