use std::collections::HashMap;
use std::sync::Arc;

use num_traits::Zero;

use super::monomial::Monomial;
use super::poly::{mul_accumulate, Polynomial, PowerCache};
use super::ratexpr::RationalExpr;
use super::rational::Rational;
use super::table::{same_table, Sym, VarTable};
use crate::error::{Error, Result};

/// Prepared simultaneous substitution `sym -> RationalExpr`.
///
/// All fractional rules are brought over one common denominator `L`, so a
/// polynomial maps to `N / L^D` with `D` the largest fractional degree of
/// its terms. No GCD is needed: `L` is built by divisibility tests and falls
/// back to plain products.
#[derive(Clone, Debug)]
pub struct Substitution {
    table: Arc<VarTable>,
    /// Rules with a polynomial image.
    poly_rules: Vec<(Sym, Polynomial)>,
    /// Rules with a fractional image, as numerators over `common`.
    frac_rules: Vec<(Sym, Polynomial)>,
    common: Polynomial,
}

/// Per-caller memo of powers; keep one per thread.
pub struct SubstCache {
    powers: PowerCache,
    common_powers: Vec<Polynomial>,
}

impl Substitution {
    pub fn new(table: &Arc<VarTable>, rules: &[(Sym, RationalExpr)]) -> Result<Substitution> {
        let mut seen = Vec::new();
        for (s, r) in rules {
            if !same_table(table, r.table()) {
                return Err(Error::TableMismatch);
            }
            if !table.contains(*s) {
                return Err(Error::UnknownSymbol(format!("#{}", s.index())));
            }
            if seen.contains(s) {
                return Err(Error::InvalidArgument(format!("symbol `{}` substituted twice", table.name(*s))));
            }
            seen.push(*s);
        }
        let mut common = Polynomial::one(table);
        for (_, r) in rules {
            let d = r.den();
            if d.is_one() || d.divides(&common) {
                continue;
            }
            if common.divides(d) {
                common = d.clone();
            } else {
                common = &common * d;
            }
        }
        let mut poly_rules = Vec::new();
        let mut frac_rules = Vec::new();
        for (s, r) in rules {
            if r.den().is_one() {
                poly_rules.push((*s, r.num().clone()));
            } else {
                let k = common.exact_divide(r.den())?.expect("common denominator is a multiple");
                frac_rules.push((*s, r.num() * &k));
            }
        }
        Ok(Substitution { table: table.clone(), poly_rules, frac_rules, common })
    }

    pub fn table(&self) -> &Arc<VarTable> {
        &self.table
    }

    pub fn common_denominator(&self) -> &Polynomial {
        &self.common
    }

    pub fn cache(&self) -> SubstCache {
        let mut bases = self.poly_rules.clone();
        bases.extend(self.frac_rules.iter().cloned());
        SubstCache { powers: PowerCache::new(bases), common_powers: vec![Polynomial::one(&self.table)] }
    }

    fn frac_syms(&self) -> Vec<Sym> {
        self.frac_rules.iter().map(|(s, _)| *s).collect()
    }

    fn all_syms(&self) -> Vec<Sym> {
        self.poly_rules.iter().chain(self.frac_rules.iter()).map(|(s, _)| *s).collect()
    }

    /// Largest total exponent over fractional-rule symbols.
    pub fn fractional_degree(&self, p: &Polynomial) -> u32 {
        p.degree_in_set(&self.frac_syms())
    }

    /// Numerator of `p` after substitution, homogenized to `common^d`.
    /// Requires `d >= fractional_degree(p)`.
    pub fn numerator_at(&self, p: &Polynomial, d: u32, cache: &mut SubstCache) -> Polynomial {
        let all = self.all_syms();
        let frac = self.frac_syms();
        let mut groups: HashMap<Monomial, Vec<(Monomial, Rational)>> = HashMap::new();
        for (m, c) in p.terms() {
            let (inside, outside) = m.split(&all);
            groups.entry(inside).or_default().push((outside, c.clone()));
        }
        let mut keys: Vec<Monomial> = groups.keys().copied().collect();
        keys.sort_unstable();
        let mut acc: HashMap<Monomial, Rational> = HashMap::new();
        for inside in keys {
            let outside = &groups[&inside];
            let w = inside.degree_in(&frac);
            debug_assert!(w <= d);
            let mut prod = cache.powers.product(&inside, &self.table);
            if w < d {
                prod = &prod * &self.common_power(d - w, cache);
            }
            mul_accumulate(&mut acc, outside, prod.terms(), None);
        }
        acc.retain(|_, c| !c.is_zero());
        Polynomial::from_map(&self.table, acc)
    }

    fn common_power(&self, k: u32, cache: &mut SubstCache) -> Polynomial {
        while cache.common_powers.len() <= k as usize {
            let next = cache.common_powers.last().expect("seeded") * &self.common;
            cache.common_powers.push(next);
        }
        cache.common_powers[k as usize].clone()
    }

    pub fn apply_poly(&self, p: &Polynomial) -> Result<RationalExpr> {
        let mut cache = self.cache();
        self.apply_poly_cached(p, &mut cache)
    }

    pub fn apply_poly_cached(&self, p: &Polynomial, cache: &mut SubstCache) -> Result<RationalExpr> {
        if !same_table(&self.table, p.table()) {
            return Err(Error::TableMismatch);
        }
        let d = self.fractional_degree(p);
        let num = self.numerator_at(p, d, cache);
        RationalExpr::new(num, self.common.pow(d))
    }

    pub fn apply(&self, f: &RationalExpr) -> Result<RationalExpr> {
        let mut cache = self.cache();
        self.apply_cached(f, &mut cache)
    }

    pub fn apply_cached(&self, f: &RationalExpr, cache: &mut SubstCache) -> Result<RationalExpr> {
        if !same_table(&self.table, f.table()) {
            return Err(Error::TableMismatch);
        }
        if f.den().is_one() {
            return self.apply_poly_cached(f.num(), cache);
        }
        let d = self.fractional_degree(f.num()).max(self.fractional_degree(f.den()));
        let num = self.numerator_at(f.num(), d, cache);
        let den = self.numerator_at(f.den(), d, cache);
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        RationalExpr::new(num, den)
    }
}

/// One-shot simultaneous substitution.
pub fn substitute(f: &RationalExpr, rules: &[(Sym, RationalExpr)]) -> Result<RationalExpr> {
    Substitution::new(f.table(), rules)?.apply(f)
}
