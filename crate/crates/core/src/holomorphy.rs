//! Holomorphy charts, polynomiality of transformed Hamiltonians and the
//! linear ansatz that characterizes each system by its charts.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::catalog::{dynamical_degree, HamiltonianSystem, ParameterValues, SystemId};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::symkernel::{
    format_rational, parse_expr, AffineRelation, Echelon, Monomial, Polynomial, Rational, RationalExpr, SparseRow,
    Substitution, Sym, VarTable,
};

/// Coordinate change to a chart near a divisor.
#[derive(Clone, Debug)]
pub struct Chart {
    pub system: SystemId,
    pub name: String,
    /// New symbol -> expression in old symbols.
    pub forward: Vec<(Sym, RationalExpr)>,
    /// Old symbol -> expression in new symbols; empty until solved.
    pub inverse: Vec<(Sym, RationalExpr)>,
    /// Added to the Hamiltonian before transforming.
    pub correction: Polynomial,
    pub params: Vec<Sym>,
    /// Parameter relation imposed on transformed expressions.
    pub relation: AffineRelation,
}

impl Chart {
    pub fn new_symbols(&self) -> Vec<Sym> {
        self.forward.iter().map(|(s, _)| *s).collect()
    }

    pub fn table(&self) -> &Arc<VarTable> {
        self.correction.table()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let t = self.table();
        let rules = |r: &[(Sym, RationalExpr)]| -> Vec<serde_json::Value> {
            r.iter().map(|(s, e)| serde_json::json!({ "symbol": t.name(*s), "expr": e.to_string() })).collect()
        };
        serde_json::json!({
            "system": self.system,
            "name": self.name,
            "forward": rules(&self.forward),
            "inverse": rules(&self.inverse),
            "correction": self.correction.to_string(),
        })
    }
}

struct ChartSpec {
    name: &'static str,
    forward: [(&'static str, &'static str); 4],
    correction: &'static str,
}

const A4_2_CHARTS: [ChartSpec; 3] = [
    ChartSpec {
        name: "r0",
        forward: [("x0", "x"), ("y0", "y"), ("z0", "1/z"), ("w0", "-(w*z + a0)*z")],
        correction: "0",
    },
    ChartSpec {
        name: "r1",
        forward: [("x1", "-((x + z^2)*y - a1)*y"), ("y1", "1/y"), ("z1", "z"), ("w1", "w - 2*y*z")],
        correction: "0",
    },
    ChartSpec {
        name: "r2",
        forward: [("x2", "-((x + y^2 + w + t)*y - a2)*y"), ("y2", "1/y"), ("z2", "z + y"), ("w2", "w")],
        correction: "y",
    },
];

const A1_1_CHARTS: [ChartSpec; 2] = [
    ChartSpec {
        name: "r0",
        forward: [("x0", "-((x + z^2)*y - a0)*y"), ("y0", "1/y"), ("z0", "z"), ("w0", "w - 2*y*z")],
        correction: "0",
    },
    ChartSpec {
        name: "r1",
        forward: [("x1", "-((x + y^2 + w^2 + t)*y - a1)*y"), ("y1", "1/y"), ("z1", "z + 2*y*w"), ("w1", "w")],
        correction: "y",
    },
];

const PDE_CHARTS: [ChartSpec; 2] = [
    ChartSpec {
        name: "R0",
        forward: [("x0", "-((q1 + q2^2)*p1 - a0)*p1"), ("y0", "1/p1"), ("z0", "q2"), ("w0", "p2 - 2*p1*q2")],
        correction: "0",
    },
    ChartSpec {
        name: "R1",
        forward: [("x1", "-((q1 + p1^2 + p2^2)*p1 - a1)*p1"), ("y1", "1/p1"), ("z1", "q2 + 2*p1*p2"), ("w1", "p2")],
        correction: "0",
    },
];

fn specs(id: SystemId) -> &'static [ChartSpec] {
    match id {
        SystemId::A4_2 => &A4_2_CHARTS,
        SystemId::A1_1 => &A1_1_CHARTS,
        SystemId::PdeA1_1 => &PDE_CHARTS,
    }
}

/// Charts of the system with inverses solved and verified.
pub fn charts(sys: &HamiltonianSystem) -> Result<Vec<Chart>> {
    specs(sys.id).iter().map(|s| build_chart(sys, s)).collect()
}

pub fn chart(sys: &HamiltonianSystem, name: &str) -> Result<Chart> {
    let spec = specs(sys.id)
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::InvalidArgument(format!("{} has no chart {name}", sys.id)))?;
    build_chart(sys, spec)
}

fn build_chart(sys: &HamiltonianSystem, spec: &ChartSpec) -> Result<Chart> {
    let t = &sys.table;
    let forward = spec.forward.iter().map(|(n, e)| Ok((t.sym(n)?, parse_expr(t, e)?))).collect::<Result<Vec<_>>>()?;
    let correction = parse_expr(t, spec.correction)?
        .to_polynomial()?
        .ok_or_else(|| Error::InvalidStructure("chart correction must be polynomial".into()))?;
    let c = Chart {
        system: sys.id,
        name: spec.name.to_string(),
        forward,
        inverse: Vec::new(),
        correction,
        params: sys.params(),
        relation: sys.relation.clone(),
    };
    chart_inverse(&c, &sys.dynamical())
}

/// Populates the inverse rules by solving for `unknowns` and checks that
/// substituting them back into the forward rules gives the identity.
pub fn chart_inverse(c: &Chart, unknowns: &[Sym]) -> Result<Chart> {
    let inverse = invert_rules(c.table(), &c.forward, unknowns)?;
    let mut out = c.clone();
    out.inverse = inverse;
    Ok(out)
}

/// Splits `e` as `(n1 u + n0) / (d1 u + d0)` if it has that shape in `u`.
fn linear_fractional(e: &RationalExpr, u: Sym) -> Option<[Polynomial; 4]> {
    let split = |p: &Polynomial| -> Option<(Polynomial, Polynomial)> {
        let mut c = p.coefficients_in(u).into_iter();
        let c0 = c.next().unwrap_or_else(|| Polynomial::zero(p.table()));
        let c1 = c.next().unwrap_or_else(|| Polynomial::zero(p.table()));
        if c.next().is_some() {
            return None;
        }
        Some((c1, c0))
    };
    let (n1, n0) = split(e.num())?;
    let (d1, d0) = split(e.den())?;
    Some([n1, n0, d1, d0])
}

/// Solves `new_k = G_k(old)` for the old symbols in `unknowns`.
///
/// Rules that become linear-fractional in a single remaining unknown are
/// solved first, one at a time. Whatever is left must be jointly linear in
/// the remaining unknowns and is solved by elimination.
pub fn invert_rules(
    table: &Arc<VarTable>,
    forward: &[(Sym, RationalExpr)],
    unknowns: &[Sym],
) -> Result<Vec<(Sym, RationalExpr)>> {
    if forward.len() != unknowns.len() {
        return Err(Error::NotInvertible(format!("{} rules for {} unknowns", forward.len(), unknowns.len())));
    }
    let mut solved: Vec<(Sym, RationalExpr)> = Vec::new();
    let mut pending: Vec<(Sym, RationalExpr)> = forward.to_vec();
    loop {
        let sub = Substitution::new(table, &solved)?;
        let open: Vec<Sym> = unknowns.iter().copied().filter(|u| !solved.iter().any(|(s, _)| s == u)).collect();
        let mut progress = false;
        let mut next = Vec::new();
        for (n, g) in pending {
            if progress {
                next.push((n, g));
                continue;
            }
            let g2 = sub.apply(&g)?;
            let present: Vec<Sym> = open.iter().copied().filter(|u| g2.contains(*u)).collect();
            if present.len() != 1 {
                next.push((n, g));
                continue;
            }
            let u = present[0];
            let Some([n1, n0, d1, d0]) = linear_fractional(&g2, u) else {
                next.push((n, g));
                continue;
            };
            // n (d1 u + d0) = n1 u + n0
            let nv = Polynomial::var(table, n);
            let num = &n0 - &(&d0 * &nv);
            let den = &(&d1 * &nv) - &n1;
            if den.is_zero() {
                return Err(Error::NotInvertible(format!("rule for {} is degenerate", table.name(n))));
            }
            solved.push((u, RationalExpr::new(num, den)?));
            progress = true;
        }
        pending = next;
        if pending.is_empty() {
            break;
        }
        if !progress {
            let sub = Substitution::new(table, &solved)?;
            let open: Vec<Sym> = unknowns.iter().copied().filter(|u| !solved.iter().any(|(s, _)| s == u)).collect();
            solved.extend(solve_linear_block(table, &sub, &pending, &open)?);
            break;
        }
    }
    // back-substitute so every rule is in new symbols only
    let unknown_set: Vec<Sym> = unknowns.to_vec();
    for _ in 0..unknowns.len() {
        if solved.iter().all(|(_, e)| unknown_set.iter().all(|u| !e.contains(*u))) {
            break;
        }
        let sub = Substitution::new(table, &solved)?;
        solved = solved.iter().map(|(s, e)| Ok((*s, sub.apply(e)?))).collect::<Result<Vec<_>>>()?;
    }
    let mut ordered = Vec::new();
    for u in unknowns {
        let e = solved
            .iter()
            .find(|(s, _)| s == u)
            .map(|(_, e)| e.clone())
            .ok_or_else(|| Error::NotInvertible(format!("no rule for {}", table.name(*u))))?;
        ordered.push((*u, e));
    }
    verify_inverse(table, forward, &ordered)?;
    Ok(ordered)
}

fn solve_linear_block(
    table: &Arc<VarTable>,
    sub: &Substitution,
    rules: &[(Sym, RationalExpr)],
    open: &[Sym],
) -> Result<Vec<(Sym, RationalExpr)>> {
    if rules.len() != open.len() {
        return Err(Error::NotInvertible("remaining rules do not match unknowns".into()));
    }
    let zeros: Vec<(Sym, Rational)> = open.iter().map(|&u| (u, Rational::zero())).collect();
    // rows: [coefficients of open..., rhs]
    let mut rows: Vec<Vec<RationalExpr>> = Vec::new();
    for (n, g) in rules {
        let g2 = sub.apply(g)?;
        if open.iter().any(|&u| g2.den().contains(u)) {
            return Err(Error::NotInvertible(format!("rule for {} is not linear", table.name(*n))));
        }
        let mut row = Vec::new();
        for &u in open {
            let c = g2.differentiate(u)?;
            if open.iter().any(|&v| c.contains(v)) {
                return Err(Error::NotInvertible(format!("rule for {} is not linear", table.name(*n))));
            }
            row.push(c);
        }
        let c0 = g2.evaluate_partial(&zeros)?;
        row.push(RationalExpr::var(table, *n).checked_sub(&c0)?);
        rows.push(row);
    }
    let m = open.len();
    // pivot factors often survive into the solution on both sides of the fraction
    let mut pivots: Vec<Polynomial> = Vec::new();
    for col in 0..m {
        let piv = (col..m)
            .find(|&r| !rows[r][col].is_zero())
            .ok_or_else(|| Error::NotInvertible("singular linear block".into()))?;
        rows.swap(col, piv);
        for p in [rows[col][col].num(), rows[col][col].den()] {
            let f = p.div_monomial(&p.monomial_content()).unwrap_or_else(|| p.clone());
            if !f.is_constant() && !pivots.contains(&f) {
                pivots.push(f);
            }
        }
        let inv = rows[col][col].recip()?;
        rows[col] = rows[col].iter().map(|e| e.checked_mul(&inv)).collect::<Result<Vec<_>>>()?;
        for r in 0..m {
            if r == col || rows[r][col].is_zero() {
                continue;
            }
            let f = rows[r][col].clone();
            let updated = rows[r]
                .iter()
                .zip(&rows[col])
                .map(|(a, b)| a.checked_sub(&f.checked_mul(b)?))
                .collect::<Result<Vec<_>>>()?;
            rows[r] = updated;
        }
    }
    open.iter().zip(rows).map(|(&u, row)| Ok((u, row[m].cancel_factors(&pivots)?))).collect()
}

fn verify_inverse(
    table: &Arc<VarTable>,
    forward: &[(Sym, RationalExpr)],
    inverse: &[(Sym, RationalExpr)],
) -> Result<()> {
    let sub = Substitution::new(table, inverse)?;
    for (n, g) in forward {
        if !sub.apply(g)?.equals(&RationalExpr::var(table, *n))? {
            return Err(Error::NotInvertible(format!("inverse fails to recover {}", table.name(*n))));
        }
    }
    Ok(())
}

/// `inverse(K + correction)`, written in the chart's symbols.
pub fn transform_hamiltonian(c: &Chart, k: &Polynomial) -> Result<RationalExpr> {
    if c.inverse.is_empty() {
        return Err(Error::MissingInverse);
    }
    let sub = Substitution::new(c.table(), &c.inverse)?;
    c.relation.reduce(&sub.apply_poly(&k.checked_add(&c.correction)?)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub denominator: String,
    /// Laurent terms with a negative exponent, or the full numerator when
    /// the denominator is not a monomial.
    pub residual_terms: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Polynomiality {
    Polynomial(Polynomial),
    Witness(Witness),
}

impl Polynomiality {
    pub fn is_polynomial(&self) -> bool {
        matches!(self, Polynomiality::Polynomial(_))
    }
}

pub fn check_polynomiality(c: &Chart, k: &Polynomial) -> Result<Polynomiality> {
    let e = transform_hamiltonian(c, k)?;
    if let Some(p) = e.to_polynomial()? {
        return Ok(Polynomiality::Polynomial(p));
    }
    let table = e.table().clone();
    let residual_terms = match e.monomial_denominator() {
        Some(d) => laurent_negative(&e, &d)
            .into_iter()
            .map(|(key, coeff)| format!("{}*{}", format_rational(&coeff), laurent_label(&table, &key)))
            .collect(),
        None => e.num().terms().iter().map(|(m, c)| Polynomial::monomial(&table, *m, c.clone()).to_string()).collect(),
    };
    Ok(Polynomiality::Witness(Witness { denominator: e.den().to_string(), residual_terms }))
}

type LaurentKey = Vec<(usize, i32)>;

/// Terms of `num / d` (times the denominator's coefficient) with some negative exponent.
fn laurent_negative(e: &RationalExpr, d: &Monomial) -> Vec<(LaurentKey, Rational)> {
    let dc = e.den().leading().map(|(_, c)| c.clone()).unwrap_or_else(Rational::one);
    let mut out = Vec::new();
    for (m, c) in e.num().terms() {
        if d.divides(m) {
            continue;
        }
        let mut key: BTreeMap<usize, i32> = BTreeMap::new();
        for (s, k) in m.support() {
            *key.entry(s.index()).or_default() += k as i32;
        }
        for (s, k) in d.support() {
            *key.entry(s.index()).or_default() -= k as i32;
        }
        key.retain(|_, v| *v != 0);
        out.push((key.into_iter().collect(), c / &dc));
    }
    out
}

fn laurent_label(table: &VarTable, key: &LaurentKey) -> String {
    if key.is_empty() {
        return "1".into();
    }
    key.iter()
        .map(|(i, e)| {
            let name = table.symbols().nth(*i).map(|s| table.name(s).to_string()).unwrap_or_default();
            if *e == 1 {
                name
            } else {
                format!("{name}^{e}")
            }
        })
        .collect::<Vec<_>>()
        .join("*")
}

/// One unknown of the ansatz: a dynamical monomial times a power of time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnsatzColumn {
    pub monomial: Monomial,
    pub t_power: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct Membership {
    pub hamiltonian: String,
    pub member: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnsatzReport {
    pub system: SystemId,
    pub alpha: Vec<String>,
    pub t_degree_bound: u32,
    pub degree: u32,
    pub charts: Vec<String>,
    pub rows: usize,
    pub columns: usize,
    pub rank: usize,
    pub nullspace_dim: usize,
    /// Whether the last column scales the chart corrections.
    pub correction_column: bool,
    pub membership: Vec<Membership>,
    /// Sparse basis vectors as `(column label, value)` pairs.
    pub basis: Vec<Vec<(String, String)>>,
}

impl AnsatzReport {
    pub fn all_members(&self) -> bool {
        self.membership.iter().all(|m| m.member)
    }
}

pub const ANSATZ_DEGREE: u32 = 6;

/// Default bound on the time degree of ansatz coefficients.
pub fn default_t_degree(id: SystemId) -> u32 {
    match id {
        SystemId::PdeA1_1 => 0,
        _ => 2,
    }
}

fn dynamical_monomials(vars: &[Sym], max_degree: u32) -> Vec<Monomial> {
    fn rec(vars: &[Sym], left: u32, cur: &mut Vec<(Sym, u32)>, out: &mut Vec<Monomial>) {
        match vars.split_first() {
            None => out.push(Monomial::from_exponents(cur)),
            Some((&v, rest)) => {
                for e in 0..=left {
                    if e > 0 {
                        cur.push((v, e));
                    }
                    rec(rest, left - e, cur, out);
                    if e > 0 {
                        cur.pop();
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    rec(vars, max_degree, &mut Vec::new(), &mut out);
    out.sort_by(|a, b| a.degree().cmp(&b.degree()).then_with(|| a.cmp(b)));
    out
}

fn column_label(table: &VarTable, col: &AnsatzColumn, t: Option<Sym>) -> String {
    let mut m = col.monomial;
    if let (Some(t), true) = (t, col.t_power > 0) {
        m = m.mul(&Monomial::var(t, col.t_power));
    }
    m.display(table).to_string()
}

/// Solves for all Hamiltonians of dynamical degree at most six whose
/// transforms under every chart of `sys` are polynomial.
pub fn ansatz_solve(
    sys: &HamiltonianSystem,
    t_degree_bound: u32,
    alpha: &ParameterValues,
    exec: Exec,
) -> Result<AnsatzReport> {
    let all = charts(sys)?;
    ansatz_solve_with_charts(sys, t_degree_bound, alpha, &all, exec)
}

pub fn ansatz_solve_with_charts(
    sys: &HamiltonianSystem,
    t_degree_bound: u32,
    alpha: &ParameterValues,
    chart_list: &[Chart],
    exec: Exec,
) -> Result<AnsatzReport> {
    if alpha.system != sys.id {
        return Err(Error::InvalidArgument("parameter sample belongs to another system".into()));
    }
    sys.relation.check(|s| alpha.get(s))?;
    let table = &sys.table;
    let time = match sys.times().as_slice() {
        [t] => Some(*t),
        _ => None,
    };
    if time.is_none() && t_degree_bound > 0 {
        return Err(Error::InvalidArgument("time-dependent ansatz needs a single time".into()));
    }
    let mut columns = Vec::new();
    for m in dynamical_monomials(&sys.dynamical(), ANSATZ_DEGREE) {
        for j in 0..=t_degree_bound {
            columns.push(AnsatzColumn { monomial: m, t_power: j });
        }
    }
    let has_correction = chart_list.iter().any(|c| !c.correction.is_zero());
    let ncols = columns.len() + usize::from(has_correction);

    let bind = alpha.values().to_vec();
    let bound_inverses: Vec<Substitution> = chart_list
        .iter()
        .map(|c| {
            let rules =
                c.inverse.iter().map(|(s, e)| Ok((*s, e.evaluate_partial(&bind)?))).collect::<Result<Vec<_>>>()?;
            if rules.is_empty() {
                return Err(Error::MissingInverse);
            }
            Substitution::new(table, &rules)
        })
        .collect::<Result<Vec<_>>>()?;

    // One task per (chart, column); each yields its negative Laurent part.
    let mut tasks: Vec<(usize, usize)> = Vec::new();
    for ci in 0..chart_list.len() {
        for col in 0..ncols {
            tasks.push((ci, col));
        }
    }
    let entries = exec.map(&tasks, |&(ci, col)| -> Result<Vec<(LaurentKey, Rational)>> {
        let p = if col < columns.len() {
            let c = &columns[col];
            let mut m = c.monomial;
            if let Some(t) = time.filter(|_| c.t_power > 0) {
                m = m.mul(&Monomial::var(t, c.t_power));
            }
            Polynomial::monomial(table, m, Rational::one())
        } else {
            chart_list[ci].correction.evaluate_partial(&bind)
        };
        if p.is_zero() {
            return Ok(Vec::new());
        }
        let e = bound_inverses[ci].apply_poly(&p)?;
        if e.is_polynomial() {
            return Ok(Vec::new());
        }
        let d = e
            .monomial_denominator()
            .ok_or_else(|| Error::InvalidStructure("chart inverse with a non-monomial denominator".into()))?;
        Ok(laurent_negative(&e, &d))
    });

    let mut rows: BTreeMap<(usize, LaurentKey), SparseRow> = BTreeMap::new();
    for (&(ci, col), res) in tasks.iter().zip(entries) {
        for (key, v) in res? {
            rows.entry((ci, key)).or_default().push((col, v));
        }
    }
    let mut ech = Echelon::new(ncols);
    let nrows = rows.len();
    for (_, mut row) in rows {
        row.sort_by_key(|(c, _)| *c);
        ech.insert(&row);
    }
    let basis_vecs = ech.nullspace();

    let labels: Vec<String> = columns
        .iter()
        .map(|c| column_label(table, c, time))
        .chain(has_correction.then(|| "<correction>".to_string()))
        .collect();

    let membership = sys
        .hamiltonians
        .iter()
        .map(|(t, h)| {
            let hb = h.evaluate_partial(&bind);
            let member = match coefficient_vector(sys, &hb, &columns, time) {
                Some(mut v) => {
                    if has_correction {
                        v.push(Rational::one());
                    }
                    ech.annihilates(&v)
                }
                None => false,
            };
            Membership {
                hamiltonian: if sys.hamiltonians.len() == 1 {
                    "H".into()
                } else {
                    format!("K{}", &table.name(*t)[1..])
                },
                member,
            }
        })
        .collect();

    let basis = basis_vecs
        .iter()
        .map(|v| {
            v.iter()
                .enumerate()
                .filter(|(_, x)| !x.is_zero())
                .map(|(i, x)| (labels[i].clone(), format_rational(x)))
                .collect()
        })
        .collect();

    Ok(AnsatzReport {
        system: sys.id,
        alpha: alpha.values().iter().map(|(_, v)| format_rational(v)).collect(),
        t_degree_bound,
        degree: ANSATZ_DEGREE,
        charts: chart_list.iter().map(|c| c.name.clone()).collect(),
        rows: nrows,
        columns: ncols,
        rank: ech.rank(),
        nullspace_dim: basis_vecs.len(),
        correction_column: has_correction,
        membership,
        basis,
    })
}

/// Coordinates of `h` in the ansatz columns; `None` if `h` lies outside the span.
fn coefficient_vector(
    sys: &HamiltonianSystem,
    h: &Polynomial,
    columns: &[AnsatzColumn],
    time: Option<Sym>,
) -> Option<Vec<Rational>> {
    if dynamical_degree(sys, h) > ANSATZ_DEGREE {
        return None;
    }
    let dynamical = sys.dynamical();
    let mut v = vec![Rational::zero(); columns.len()];
    for (m, c) in h.terms() {
        let (dm, rest) = m.split(&dynamical);
        let tp = match time {
            Some(t) => rest.exponent(t),
            None => 0,
        };
        if rest.degree() != tp {
            return None;
        }
        let idx = columns.iter().position(|col| col.monomial == dm && col.t_power == tp)?;
        v[idx] = c.clone();
    }
    Some(v)
}
