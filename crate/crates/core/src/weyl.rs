//! Bäcklund transformations as birational maps with affine parameter actions.
//!
//! Products follow the automorphism convention: `(m1 m2)(f) = m1(m2(f))`.
//! In a word such as `s1 s2 s1 s0` the rightmost letter substitutes first
//! into an expression, while as a map of points the leftmost letter moves
//! the point first.

use std::sync::Arc;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::catalog::{HamiltonianSystem, SystemId};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::flows::field_from_hamiltonian;
use crate::symkernel::{
    format_rational, parse_expr, poisson_bracket, q, IdentityMode, PointSampler, Polynomial, Rational, RationalExpr,
    Substitution, Sym, VarTable,
};

/// `a -> M a + c` on the ordered parameter vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamAction {
    pub matrix: Vec<Vec<Rational>>,
    pub offset: Vec<Rational>,
}

impl ParamAction {
    pub fn identity(n: usize) -> ParamAction {
        let matrix =
            (0..n).map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect()).collect();
        ParamAction { matrix, offset: vec![Rational::zero(); n] }
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn apply(&self, a: &[Rational]) -> Vec<Rational> {
        self.matrix
            .iter()
            .zip(&self.offset)
            .map(|(row, c)| row.iter().zip(a).map(|(m, x)| m * x).fold(c.clone(), |s, v| s + v))
            .collect()
    }

    /// Action of the automorphism product `outer inner`. The inner
    /// substitution runs first on expressions, so the matrix is
    /// `M_inner M_outer` and the offset `M_inner c_outer + c_inner`.
    pub fn product(outer: &ParamAction, inner: &ParamAction) -> ParamAction {
        let n = outer.dim();
        let mut matrix = vec![vec![Rational::zero(); n]; n];
        for (i, row) in matrix.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                for k in 0..n {
                    *cell += &inner.matrix[i][k] * &outer.matrix[k][j];
                }
            }
        }
        ParamAction { matrix, offset: inner.apply(&outer.offset) }
    }

    /// Substitution rules `a_i -> (M a + c)_i`.
    pub fn rules(&self, table: &Arc<VarTable>, params: &[Sym]) -> Vec<(Sym, RationalExpr)> {
        params
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let mut p = Polynomial::constant(table, self.offset[i].clone());
                for (j, &sj) in params.iter().enumerate() {
                    p = p + Polynomial::var(table, sj).scale(&self.matrix[i][j]);
                }
                (s, RationalExpr::from_poly(p))
            })
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        *self == ParamAction::identity(self.dim())
    }
}

/// A single generator: rules for the dynamical symbols plus a parameter action.
#[derive(Clone, Debug)]
pub struct Elementary {
    pub name: String,
    pub rules: Vec<(Sym, RationalExpr)>,
    pub action: ParamAction,
    /// Divisor whose powers are the only denominators of the rules.
    pub divisor: Option<Polynomial>,
}

/// Word in the generators of one system.
#[derive(Clone, Debug)]
pub struct BirationalMap {
    pub system: SystemId,
    pub name: String,
    table: Arc<VarTable>,
    dynamical: Vec<Sym>,
    params: Vec<Sym>,
    /// Letters in written order, leftmost first.
    letters: Vec<Elementary>,
    action: ParamAction,
}

impl BirationalMap {
    pub fn identity(sys: &HamiltonianSystem) -> BirationalMap {
        let n = sys.params().len();
        BirationalMap {
            system: sys.id,
            name: "id".into(),
            table: sys.table.clone(),
            dynamical: sys.dynamical(),
            params: sys.params(),
            letters: Vec::new(),
            action: ParamAction::identity(n),
        }
    }

    fn from_letter(sys: &HamiltonianSystem, e: Elementary) -> BirationalMap {
        BirationalMap {
            system: sys.id,
            name: e.name.clone(),
            table: sys.table.clone(),
            dynamical: sys.dynamical(),
            params: sys.params(),
            action: e.action.clone(),
            letters: vec![e],
        }
    }

    pub fn table(&self) -> &Arc<VarTable> {
        &self.table
    }

    pub fn letters(&self) -> &[Elementary] {
        &self.letters
    }

    pub fn param_action(&self) -> &ParamAction {
        &self.action
    }

    pub fn word(&self) -> String {
        self.letters.iter().map(|l| l.name.as_str()).collect::<Vec<_>>().join(" ")
    }

    /// Generators are involutions, so the inverse is the reversed word.
    pub fn inverse(&self) -> BirationalMap {
        let mut letters = self.letters.clone();
        letters.reverse();
        let action = letters
            .iter()
            .fold(ParamAction::identity(self.params.len()), |acc, l| ParamAction::product(&acc, &l.action));
        BirationalMap { name: format!("({})^-1", self.name), letters, action, ..self.clone() }
    }

    /// Substitution rules of the whole word, expression by expression.
    pub fn rules(&self) -> Result<Vec<(Sym, RationalExpr)>> {
        self.dynamical.iter().map(|&v| Ok((v, apply_map(self, &RationalExpr::var(&self.table, v))?))).collect()
    }

    /// Image of a rational point: dynamical, time and parameter values.
    pub fn apply_point(&self, point: &[(Sym, Rational)]) -> Result<Vec<(Sym, Rational)>> {
        let mut cur = point.to_vec();
        for l in &self.letters {
            cur = apply_letter_point(l, &self.params, &cur)?;
        }
        Ok(cur)
    }

    pub fn to_json(&self) -> Result<serde_json::Value> {
        let rules: Vec<serde_json::Value> = if self.letters.len() == 1 {
            self.letters[0]
                .rules
                .iter()
                .map(|(s, r)| serde_json::json!({ "symbol": self.table.name(*s), "image": r.to_string() }))
                .collect()
        } else {
            Vec::new()
        };
        Ok(serde_json::json!({
            "system": self.system,
            "name": self.name,
            "word": self.word(),
            "rules": rules,
            "parameter_action": param_action_json(&self.action, &self.table, &self.params),
        }))
    }
}

fn param_action_json(a: &ParamAction, table: &VarTable, params: &[Sym]) -> serde_json::Value {
    serde_json::json!({
        "parameters": params.iter().map(|&s| table.name(s)).collect::<Vec<_>>(),
        "matrix": a.matrix.iter().map(|r| r.iter().map(format_rational).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "offset": a.offset.iter().map(format_rational).collect::<Vec<_>>(),
    })
}

fn apply_letter_point(l: &Elementary, params: &[Sym], point: &[(Sym, Rational)]) -> Result<Vec<(Sym, Rational)>> {
    let get = |s: Sym| point.iter().find(|(k, _)| *k == s).map(|(_, v)| v.clone());
    let mut out = point.to_vec();
    for (s, r) in &l.rules {
        let v = r.evaluate(get)?;
        if let Some(slot) = out.iter_mut().find(|(k, _)| k == s) {
            slot.1 = v;
        }
    }
    let a: Result<Vec<Rational>> =
        params.iter().map(|&p| get(p).ok_or_else(|| Error::Unbound(format!("parameter #{}", p.index())))).collect();
    let a2 = l.action.apply(&a?);
    for (p, v) in params.iter().zip(a2) {
        if let Some(slot) = out.iter_mut().find(|(k, _)| k == p) {
            slot.1 = v;
        }
    }
    Ok(out)
}

struct GeneratorSpec {
    name: &'static str,
    rules: &'static [(&'static str, &'static str)],
    /// Images of the parameters in table order.
    action: &'static [&'static str],
    divisor: usize,
}

const A4_2_GENERATORS: &[GeneratorSpec] = &[
    GeneratorSpec { name: "s0", rules: &[("z", "z + a0/w")], action: &["-a0", "a1 + a0", "a2"], divisor: 0 },
    GeneratorSpec {
        name: "s1",
        rules: &[("y", "y - a1/(x + z^2)"), ("w", "w - 2*a1*z/(x + z^2)")],
        action: &["a0 + 2*a1", "-a1", "a2 + a1"],
        divisor: 1,
    },
    GeneratorSpec {
        name: "s2",
        rules: &[
            ("x", "x + 2*a2*y/(x + y^2 + w + t) - a2^2/(x + y^2 + w + t)^2"),
            ("y", "y - a2/(x + y^2 + w + t)"),
            ("z", "z + a2/(x + y^2 + w + t)"),
        ],
        action: &["a0", "a1 + 2*a2", "-a2"],
        divisor: 2,
    },
];

const A1_1_GENERATORS: &[GeneratorSpec] = &[
    GeneratorSpec {
        name: "s0",
        rules: &[("y", "y - a0/(x + z^2)"), ("w", "w - 2*a0*z/(x + z^2)")],
        action: &["-a0", "a1 + 2*a0"],
        divisor: 0,
    },
    GeneratorSpec {
        name: "s1",
        rules: &[
            ("x", "x + 2*a1*y/(x + y^2 + w^2 + t) - a1^2/(x + y^2 + w^2 + t)^2"),
            ("y", "y - a1/(x + y^2 + w^2 + t)"),
            ("z", "z + 2*a1*w/(x + y^2 + w^2 + t)"),
        ],
        action: &["a0 + 2*a1", "-a1"],
        divisor: 1,
    },
];

const PDE_GENERATORS: &[GeneratorSpec] = &[
    GeneratorSpec {
        name: "s0",
        rules: &[("p1", "p1 - a0/(q1 + q2^2)"), ("p2", "p2 - 2*a0*q2/(q1 + q2^2)")],
        action: &["-a0", "a1 + 2*a0"],
        divisor: 0,
    },
    GeneratorSpec {
        name: "s1",
        rules: &[
            ("q1", "q1 + 2*a1*p1/(q1 + p1^2 + p2^2) - a1^2/(q1 + p1^2 + p2^2)^2"),
            ("p1", "p1 - a1/(q1 + p1^2 + p2^2)"),
            ("q2", "q2 + 2*a1*p2/(q1 + p1^2 + p2^2)"),
        ],
        action: &["a0 + 2*a1", "-a1"],
        divisor: 1,
    },
];

fn specs(id: SystemId) -> &'static [GeneratorSpec] {
    match id {
        SystemId::A4_2 => A4_2_GENERATORS,
        SystemId::A1_1 => A1_1_GENERATORS,
        SystemId::PdeA1_1 => PDE_GENERATORS,
    }
}

fn build_elementary(sys: &HamiltonianSystem, spec: &GeneratorSpec) -> Result<Elementary> {
    let t = &sys.table;
    let rules: Result<Vec<(Sym, RationalExpr)>> =
        spec.rules.iter().map(|(v, r)| Ok((t.sym(v)?, parse_expr(t, r)?))).collect();
    let params = sys.params();
    let n = params.len();
    let mut matrix = vec![vec![Rational::zero(); n]; n];
    let mut offset = vec![Rational::zero(); n];
    for (i, img) in spec.action.iter().enumerate() {
        let p = crate::symkernel::parse_poly(t, img)?;
        for (m, c) in p.terms() {
            if m.is_one() {
                offset[i] = c.clone();
            } else {
                let (s, _) = m.support().next().expect("linear term");
                let j = params.iter().position(|&x| x == s).expect("parameter symbol");
                matrix[i][j] = c.clone();
            }
        }
    }
    Ok(Elementary {
        name: spec.name.to_string(),
        rules: rules?,
        action: ParamAction { matrix, offset },
        divisor: Some(sys.divisor(spec.divisor)?.poly.clone()),
    })
}

pub fn generator(sys: &HamiltonianSystem, name: &str) -> Result<BirationalMap> {
    let spec =
        specs(sys.id).iter().find(|s| s.name == name).ok_or_else(|| Error::UnknownGenerator(name.to_string()))?;
    Ok(BirationalMap::from_letter(sys, build_elementary(sys, spec)?))
}

pub fn generators(sys: &HamiltonianSystem) -> Result<Vec<BirationalMap>> {
    specs(sys.id).iter().map(|s| Ok(BirationalMap::from_letter(sys, build_elementary(sys, s)?))).collect()
}

/// Index of the divisor paired with generator `name`.
pub fn generator_divisor_index(id: SystemId, name: &str) -> Result<usize> {
    specs(id)
        .iter()
        .find(|s| s.name == name)
        .map(|s| s.divisor)
        .ok_or_else(|| Error::UnknownGenerator(name.to_string()))
}

/// Automorphism product `m1 m2`.
pub fn compose(m1: &BirationalMap, m2: &BirationalMap) -> Result<BirationalMap> {
    if m1.system != m2.system {
        return Err(Error::InvalidArgument(format!("cannot compose maps of {} and {}", m1.system, m2.system)));
    }
    let mut letters = m1.letters.clone();
    letters.extend(m2.letters.iter().cloned());
    Ok(BirationalMap {
        name: format!("{} {}", m1.name, m2.name),
        action: ParamAction::product(&m1.action, &m2.action),
        letters,
        ..m1.clone()
    })
}

/// Parses a space-separated word such as `s1 s2 s1 s0`; `T1`, `T2` and `T`
/// expand to the translations of the system.
pub fn parse_word(sys: &HamiltonianSystem, word: &str) -> Result<BirationalMap> {
    let mut m = BirationalMap::identity(sys);
    let mut first = true;
    for tok in word.split_whitespace() {
        let next = match tok {
            "T1" | "T2" | "T" => translation(sys, tok)?,
            _ => generator(sys, tok)?,
        };
        m = if first { next } else { compose(&m, &next)? };
        first = false;
    }
    if !first {
        m.name = word.split_whitespace().collect::<Vec<_>>().join(" ");
    }
    Ok(m)
}

/// Translation operators: `T1 = s1 s2 s1 s0`, `T2 = s1 T1 s1` for A4_2 and
/// `T = s1 s0` for the A1 systems.
pub fn translation(sys: &HamiltonianSystem, name: &str) -> Result<BirationalMap> {
    let mut m = match (sys.id, name) {
        (SystemId::A4_2, "T1") => parse_word(sys, "s1 s2 s1 s0")?,
        (SystemId::A4_2, "T2") => parse_word(sys, "s1 s1 s2 s1 s0 s1")?,
        (SystemId::A1_1 | SystemId::PdeA1_1, "T") => parse_word(sys, "s1 s0")?,
        _ => return Err(Error::UnknownGenerator(name.to_string())),
    };
    m.name = name.to_string();
    Ok(m)
}

/// Simultaneous substitution of the word into `f`, rightmost letter first.
pub fn apply_map(m: &BirationalMap, f: &RationalExpr) -> Result<RationalExpr> {
    let mut cur = f.clone();
    for l in m.letters.iter().rev() {
        let mut rules = l.rules.clone();
        rules.extend(l.action.rules(&m.table, &m.params));
        let sub = Substitution::new(&m.table, &rules)?;
        cur = sub.apply(&cur)?;
        if let Some(d) = &l.divisor {
            cur = cur.cancel_factors(std::slice::from_ref(d))?;
        }
    }
    Ok(cur)
}

/// Offset of the parameter action once the relation is imposed, or `None`
/// when the action is not a pure translation on the relation hyperplane.
pub fn translation_offset(sys: &HamiltonianSystem, m: &BirationalMap) -> Result<Option<Vec<Rational>>> {
    let params = sys.params();
    let rules = m.action.rules(&sys.table, &params);
    let mut out = Vec::new();
    for (s, img) in rules {
        let diff = img.checked_sub(&RationalExpr::var(&sys.table, s))?;
        let red = sys.relation.reduce(&diff)?;
        match red.as_polynomial().and_then(|p| p.constant_value()) {
            Some(c) => out.push(c),
            None => return Ok(None),
        }
    }
    Ok(Some(out))
}

/// True when the parameter action maps the relation hyperplane into itself.
pub fn preserves_relation(sys: &HamiltonianSystem, m: &BirationalMap) -> Result<bool> {
    let res = RationalExpr::from_poly(sys.relation.residual_polynomial());
    let img = Substitution::new(&sys.table, &m.action.rules(&sys.table, &sys.params()))?.apply(&res)?;
    Ok(sys.relation.reduce(&img)?.is_zero())
}

#[derive(Clone, Debug, Serialize)]
pub struct SymmetryEntry {
    pub generator: String,
    pub time: String,
    pub variable: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SymmetryReport {
    pub system: SystemId,
    pub entries: Vec<SymmetryEntry>,
}

impl SymmetryReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> usize {
        self.entries.iter().filter(|e| !e.pass).count()
    }
}

/// Checks that `m` maps the flow of every time variable to itself:
/// `sum_u dm(v)/du * X_u + dm(v)/dt = m(X_v)` on the relation.
pub fn verify_symmetry(sys: &HamiltonianSystem, m: &BirationalMap, exec: Exec) -> Result<SymmetryReport> {
    verify_symmetry_with(sys, m, &sys.hamiltonians, exec)
}

/// Same check against caller-supplied Hamiltonians, one per time symbol.
pub fn verify_symmetry_with(
    sys: &HamiltonianSystem,
    m: &BirationalMap,
    hamiltonians: &[(Sym, Polynomial)],
    exec: Exec,
) -> Result<SymmetryReport> {
    let rules = m.rules()?;
    let mut items = Vec::new();
    for (t, h) in hamiltonians {
        let field = field_from_hamiltonian(&sys.structure, *t, h)?;
        for (v, image) in &rules {
            items.push((*t, *v, field.clone(), image.clone()));
        }
    }
    let results = exec.map(&items, |(t, v, field, image)| -> Result<SymmetryEntry> {
        let mut lhs = image.differentiate(*t)?;
        for (u, xu) in field.components() {
            let d = image.differentiate(*u)?;
            if !d.is_zero() {
                lhs = lhs.checked_add(&d.checked_mul(xu)?)?;
            }
        }
        let xv = field.component(*v).expect("dynamical component");
        let rhs = apply_map(m, xv)?;
        let lhs = sys.relation.reduce(&lhs)?;
        let rhs = sys.relation.reduce(&rhs)?;
        let diff = lhs.difference_numerator(&rhs)?;
        let diff = sys.relation.reduce_poly(&diff)?;
        let pass = diff.is_zero();
        Ok(SymmetryEntry {
            generator: m.name.clone(),
            time: sys.table.name(*t).to_string(),
            variable: sys.table.name(*v).to_string(),
            pass,
            witness: (!pass).then(|| format!("{} terms in residual numerator", diff.len())),
        })
    });
    Ok(SymmetryReport { system: sys.id, entries: results.into_iter().collect::<Result<_>>()? })
}

/// Draws a generic rational point: dynamical, time and parameter values on the relation.
pub fn sample_point(sys: &HamiltonianSystem, sampler: &mut PointSampler) -> Result<Vec<(Sym, Rational)>> {
    let mut pt = Vec::new();
    for s in sys.dynamical().into_iter().chain(sys.times()) {
        pt.push((s, sampler.rational()));
    }
    let elim = sys.relation.eliminated();
    let mut params = Vec::new();
    for s in sys.params() {
        if s != elim {
            params.push((s, sampler.rational()));
        }
    }
    let rule = sys.relation.solve_for(elim)?;
    let v = rule.evaluate(|s| params.iter().find(|(k, _)| *k == s).map(|(_, v)| v.clone()))?;
    params.push((elim, v));
    for s in sys.params() {
        let val = params.iter().find(|(k, _)| *k == s).expect("all parameters").1.clone();
        pt.push((s, val));
    }
    Ok(pt)
}

/// Compares two maps on sampled points, including the parameter images.
pub fn maps_agree_sampled(
    sys: &HamiltonianSystem,
    a: &BirationalMap,
    b: &BirationalMap,
    seed: u64,
    points: usize,
) -> Result<bool> {
    let mut sampler = PointSampler::new(seed, Vec::new());
    let mut accepted = 0;
    let mut tries = 0;
    while accepted < points {
        if tries > 20 * points + 20 {
            return Err(Error::SamplingFailed { wanted: points, tries });
        }
        tries += 1;
        let p = sample_point(sys, &mut sampler)?;
        let (pa, pb) = match (a.apply_point(&p), b.apply_point(&p)) {
            (Ok(x), Ok(y)) => (x, y),
            (Err(Error::SingularPoint), _) | (_, Err(Error::SingularPoint)) => continue,
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        accepted += 1;
        if pa != pb {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum RelationOrder {
    Found { n: u32 },
    ExceedsMax { max_n: u32, reason: String },
}

/// Smallest `n <= max_n` with `(s_i s_j)^n = id`, exact on parameters and
/// sampled on variables.
pub fn relation_order(sys: &HamiltonianSystem, i: usize, j: usize, max_n: u32, seed: u64) -> Result<RelationOrder> {
    if max_n == 0 {
        return Err(Error::InvalidArgument("max_n must be at least 1".into()));
    }
    let gens = generators(sys)?;
    let gi = gens.get(i).ok_or_else(|| Error::UnknownGenerator(format!("s{i}")))?;
    let gj = gens.get(j).ok_or_else(|| Error::UnknownGenerator(format!("s{j}")))?;
    let pair = compose(gi, gj)?;
    let id = BirationalMap::identity(sys);
    let mut power = pair.clone();
    for n in 1..=max_n {
        if power.action.is_identity()
            && maps_agree_sampled(sys, &power, &id, seed, crate::symkernel::identity::DEFAULT_POINTS)?
        {
            return Ok(RelationOrder::Found { n });
        }
        power = compose(&power, &pair)?;
    }
    let reason = match translation_offset(sys, &pair)? {
        Some(off) if off.iter().any(|c| !c.is_zero()) => format!(
            "parameter action of s{i} s{j} is the translation ({}) on the relation, so no power is the identity",
            off.iter().map(format_rational).collect::<Vec<_>>().join(", ")
        ),
        _ => format!("no power up to {max_n} is the identity"),
    };
    Ok(RelationOrder::ExceedsMax { max_n, reason })
}

#[derive(Clone, Debug, Serialize)]
pub struct ExponentialReport {
    pub generator: String,
    pub g: String,
    /// Highest nonzero order of the series, when it terminates.
    pub terminated_at: Option<u32>,
    pub matches_generator: bool,
}

/// `s_i(g) = sum_k (a_i/f_i)^k / k! ad_{f_i}^k(g)`, truncated where the
/// iterated bracket vanishes.
pub fn exponential_formula_check(
    sys: &HamiltonianSystem,
    i: usize,
    g: &Polynomial,
    max_order: u32,
) -> Result<ExponentialReport> {
    let gens = generators(sys)?;
    let gen = gens.get(i).ok_or_else(|| Error::UnknownGenerator(format!("s{i}")))?;
    let div = sys.divisor(generator_divisor_index(sys.id, &gen.name)?)?;
    let f = RationalExpr::from_poly(div.poly.clone());
    let ratio = RationalExpr::var(&sys.table, div.param).checked_div(&f)?;
    let gr = RationalExpr::from_poly(g.clone());
    let mut sum = gr.clone();
    let mut ad = gr.clone();
    let mut coeff = RationalExpr::one(&sys.table);
    let mut terminated_at = if g.is_zero() { Some(0) } else { None };
    for k in 1..=max_order {
        ad = poisson_bracket(&f, &ad, &sys.structure)?;
        if ad.is_zero() {
            terminated_at = Some(k - 1);
            break;
        }
        coeff = coeff.checked_mul(&ratio)?.scale(&q(1, k as i64));
        sum = sum.checked_add(&coeff.checked_mul(&ad)?)?;
    }
    if terminated_at.is_none() {
        // one more bracket decides termination exactly at max_order
        if poisson_bracket(&f, &ad, &sys.structure)?.is_zero() {
            terminated_at = Some(max_order);
        }
    }
    let target = apply_map(gen, &gr)?;
    let matches_generator = terminated_at.is_some() && sum.equals(&target)?;
    Ok(ExponentialReport { generator: gen.name.clone(), g: g.to_string(), terminated_at, matches_generator })
}

/// Samples a composite identity in sampled mode unless symbolic is requested.
pub fn maps_agree(sys: &HamiltonianSystem, a: &BirationalMap, b: &BirationalMap, mode: IdentityMode) -> Result<bool> {
    match mode {
        IdentityMode::Sampled { seed, points } => maps_agree_sampled(sys, a, b, seed, points),
        IdentityMode::Symbolic => {
            if a.action != b.action {
                return Ok(false);
            }
            let ra = a.rules()?;
            let rb = b.rules()?;
            for ((_, x), (_, y)) in ra.iter().zip(&rb) {
                if !x.equals(y)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}
