//! Constructors for the three Hamiltonian systems, their parameter relations,
//! canonical pairings and invariant divisors.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symkernel::{
    format_rational, parse_poly, qi, AffineRelation, CanonicalStructure, Polynomial, Rational, Sym, SymbolClass,
    VarTable,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SystemId {
    #[serde(rename = "A4_2")]
    A4_2,
    #[serde(rename = "A1_1")]
    A1_1,
    #[serde(rename = "PDE_A1_1")]
    PdeA1_1,
}

impl SystemId {
    pub const ALL: [SystemId; 3] = [SystemId::A4_2, SystemId::A1_1, SystemId::PdeA1_1];

    pub fn as_str(self) -> &'static str {
        match self {
            SystemId::A4_2 => "A4_2",
            SystemId::A1_1 => "A1_1",
            SystemId::PdeA1_1 => "PDE_A1_1",
        }
    }
}

impl fmt::Display for SystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SystemId {
    type Err = Error;
    fn from_str(s: &str) -> Result<SystemId> {
        match s {
            "A4_2" => Ok(SystemId::A4_2),
            "A1_1" => Ok(SystemId::A1_1),
            "PDE_A1_1" => Ok(SystemId::PdeA1_1),
            other => Err(Error::UnknownSystem(other.to_string())),
        }
    }
}

/// Invariant divisor `f_i` paired with the parameter `a_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Divisor {
    pub name: String,
    pub poly: Polynomial,
    pub param: Sym,
}

#[derive(Clone, Debug)]
pub struct HamiltonianSystem {
    pub id: SystemId,
    pub table: Arc<VarTable>,
    pub structure: CanonicalStructure,
    /// One Hamiltonian per time symbol, in time order.
    pub hamiltonians: Vec<(Sym, Polynomial)>,
    pub relation: AffineRelation,
    pub divisors: Vec<Divisor>,
    pub generators: Vec<String>,
}

impl HamiltonianSystem {
    pub fn sym(&self, name: &str) -> Sym {
        self.table.sym(name).unwrap_or_else(|_| panic!("catalog symbol `{name}` missing"))
    }

    /// Dynamical symbols in pairing order (x, y, z, w or q1, p1, q2, p2).
    pub fn dynamical(&self) -> Vec<Sym> {
        self.structure.variables()
    }

    pub fn times(&self) -> Vec<Sym> {
        self.hamiltonians.iter().map(|(t, _)| *t).collect()
    }

    pub fn params(&self) -> Vec<Sym> {
        self.table.of_class(SymbolClass::Parameter)
    }

    pub fn hamiltonian(&self, time: Sym) -> Result<&Polynomial> {
        self.hamiltonians
            .iter()
            .find(|(t, _)| *t == time)
            .map(|(_, h)| h)
            .ok_or_else(|| Error::UnknownSymbol(self.table.name(time).to_string()))
    }

    pub fn time_by_name(&self, name: &str) -> Result<Sym> {
        let s = self.table.sym(name)?;
        self.hamiltonian(s)?;
        Ok(s)
    }

    pub fn divisor(&self, i: usize) -> Result<&Divisor> {
        self.divisors.get(i).ok_or_else(|| Error::InvalidArgument(format!("{} has no divisor f{i}", self.id)))
    }

    pub fn poly(&self, src: &str) -> Polynomial {
        parse_poly(&self.table, src).unwrap_or_else(|e| panic!("catalog transcription `{src}`: {e}"))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let vars: Vec<serde_json::Value> = self
            .table
            .symbols()
            .filter(|&s| self.table.class(s) != SymbolClass::Auxiliary)
            .map(|s| serde_json::json!({ "name": self.table.name(s), "class": self.table.class(s) }))
            .collect();
        let hams: Vec<serde_json::Value> = self
            .hamiltonians
            .iter()
            .map(|(t, h)| {
                serde_json::json!({
                    "time": self.table.name(*t),
                    "expression": h.to_string(),
                    "terms": poly_terms_json(h),
                })
            })
            .collect();
        let divisors: Vec<serde_json::Value> = self
            .divisors
            .iter()
            .map(|d| {
                serde_json::json!({
                    "name": d.name,
                    "polynomial": d.poly.to_string(),
                    "parameter": self.table.name(d.param),
                })
            })
            .collect();
        serde_json::json!({
            "id": self.id,
            "variables": vars,
            "pairs": self.structure.to_json(),
            "hamiltonians": hams,
            "relation": self.relation.to_json(),
            "divisors": divisors,
            "generators": self.generators,
        })
    }
}

fn poly_terms_json(p: &Polynomial) -> Vec<serde_json::Value> {
    p.terms()
        .iter()
        .rev()
        .map(|(m, c)| {
            serde_json::json!({ "monomial": m.display(p.table()).to_string(), "coefficient": format_rational(c) })
        })
        .collect()
}

fn dyn_(n: &str) -> (String, SymbolClass) {
    (n.to_string(), SymbolClass::Dynamical)
}

fn aux(n: &str) -> (String, SymbolClass) {
    (n.to_string(), SymbolClass::Auxiliary)
}

fn chart_coords(indices: &[usize]) -> Vec<(String, SymbolClass)> {
    let mut v = Vec::new();
    for i in indices {
        for base in ["x", "y", "z", "w"] {
            v.push(aux(&format!("{base}{i}")));
        }
    }
    v
}

/// Second Painlevé Hamiltonian `x y^2 + x^2 + t x - a y` in the given symbols.
pub fn h_ii(table: &Arc<VarTable>, x: &str, y: &str, t: &str, a: &str) -> Result<Polynomial> {
    parse_poly(table, &format!("{x}*{y}^2 + {x}^2 + {t}*{x} - {a}*{y}"))
}

/// Autonomous second Painlevé Hamiltonian `z^2 w - w^2/2 + a z`.
pub fn h_ii_auto(table: &Arc<VarTable>, z: &str, w: &str, a: &str) -> Result<Polynomial> {
    parse_poly(table, &format!("{z}^2*{w} - 1/2*{w}^2 + {a}*{z}"))
}

/// Harmonic part `z^2/4 - w^2/4`.
pub fn h_3(table: &Arc<VarTable>, z: &str, w: &str) -> Result<Polynomial> {
    parse_poly(table, &format!("1/4*{z}^2 - 1/4*{w}^2"))
}

const A4_2_H: &str = "2*x*y^2 + 2*x^2 + 2*t*x - 2*a1*y + z^2*w - 1/2*w^2 + a0*z + x*w + 2*y*z*w";
const A1_1_H: &str = "x*y^2 + x^2 + t*x - a0*y + 1/4*z^2 - 1/4*w^2 + y*z*w";

const PDE_K1: &str = "q1*p1^2 + q1^2 - a0*p1 + 1/4*q2^2 - 1/4*p2^2 + p1*q2*p2";
const PDE_K2: &str = "q2^2*p2^2 - 1/4*q2^2 + 1/4*p2^2 - 2*a0*q2*p2 + q1*q2^2 + q1*p2^2 - p1*q2*p2 + p1^2*q2^2";
const PDE_K3_UNCORRECTED: &str = "1/2*q1^2*p1^4 + q1^3*p1^2 + 1/2*q1^4 - a0*q1*p1^3 + a1*q1^2*p1 \
    + 1/2*a0^2*p1^2 + 1/32*q2^4 + 1/32*p2^4 - 1/16*q2^2*p2^2 + q1*p1^3*q2*p2 \
    + 1/2*p1^2*q2^2*p2^2 - 1/4*q1*p1^2*p2^2 - 1/4*p1*q2*p2^3 + q1^2*p1*q2*p2 \
    + 1/4*q1*p1^2*q2^2 + 1/4*p1*q2^3*p2 - a0*p1^2*q2*p2 + 1/4*a0*p1*p2^2 + 1/4*a1*p1*q2^2";
/// Terms restoring `K3 = K1^2 / 2` on the relation; see the crate README.
const PDE_K3_CORRECTION: &str = "1/4*q1^2*q2^2 - 1/4*q1^2*p2^2";

pub fn build_system(id: SystemId) -> Result<HamiltonianSystem> {
    match id {
        SystemId::A4_2 => build_a4_2(),
        SystemId::A1_1 => build_a1_1(),
        SystemId::PdeA1_1 => build_pde(),
    }
}

fn build_a4_2() -> Result<HamiltonianSystem> {
    let mut entries: Vec<(String, SymbolClass)> = ["x", "y", "z", "w"].iter().map(|n| dyn_(n)).collect();
    entries.push(("t".into(), SymbolClass::Time));
    for a in ["a0", "a1", "a2"] {
        entries.push((a.into(), SymbolClass::Parameter));
    }
    entries.extend(chart_coords(&[0, 1, 2]));
    let table = VarTable::new(entries)?;
    let s = |n: &str| table.sym(n);
    let structure = CanonicalStructure::from_names(&table, &[("x", "y"), ("z", "w")])?;
    let h = parse_poly(&table, A4_2_H)?;
    let relation =
        AffineRelation::new(&table, vec![(s("a0")?, qi(1)), (s("a1")?, qi(2)), (s("a2")?, qi(2))], qi(1), s("a2")?)?;
    let divisors = vec![
        Divisor { name: "f0".into(), poly: parse_poly(&table, "w")?, param: s("a0")? },
        Divisor { name: "f1".into(), poly: parse_poly(&table, "x + z^2")?, param: s("a1")? },
        Divisor { name: "f2".into(), poly: parse_poly(&table, "x + y^2 + w + t")?, param: s("a2")? },
    ];
    Ok(HamiltonianSystem {
        id: SystemId::A4_2,
        hamiltonians: vec![(s("t")?, h)],
        table,
        structure,
        relation,
        divisors,
        generators: vec!["s0".into(), "s1".into(), "s2".into()],
    })
}

fn build_a1_1() -> Result<HamiltonianSystem> {
    let mut entries: Vec<(String, SymbolClass)> = ["x", "y", "z", "w"].iter().map(|n| dyn_(n)).collect();
    entries.push(("t".into(), SymbolClass::Time));
    for a in ["a0", "a1"] {
        entries.push((a.into(), SymbolClass::Parameter));
    }
    entries.extend(chart_coords(&[0, 1]));
    let table = VarTable::new(entries)?;
    let s = |n: &str| table.sym(n);
    let structure = CanonicalStructure::from_names(&table, &[("x", "y"), ("z", "w")])?;
    let h = parse_poly(&table, A1_1_H)?;
    let relation = AffineRelation::new(&table, vec![(s("a0")?, qi(1)), (s("a1")?, qi(1))], qi(1), s("a1")?)?;
    let divisors = vec![
        Divisor { name: "f0".into(), poly: parse_poly(&table, "x + z^2")?, param: s("a0")? },
        Divisor { name: "f1".into(), poly: parse_poly(&table, "x + y^2 + w^2 + t")?, param: s("a1")? },
    ];
    Ok(HamiltonianSystem {
        id: SystemId::A1_1,
        hamiltonians: vec![(s("t")?, h)],
        table,
        structure,
        relation,
        divisors,
        generators: vec!["s0".into(), "s1".into()],
    })
}

fn build_pde() -> Result<HamiltonianSystem> {
    let mut entries: Vec<(String, SymbolClass)> = ["q1", "p1", "q2", "p2"].iter().map(|n| dyn_(n)).collect();
    for t in ["t1", "t2", "t3"] {
        entries.push((t.into(), SymbolClass::Time));
    }
    for a in ["a0", "a1"] {
        entries.push((a.into(), SymbolClass::Parameter));
    }
    entries.extend(chart_coords(&[0, 1]));
    for n in ["x", "y", "z", "w", "u", "u1", "u2", "u3"] {
        entries.push(aux(n));
    }
    let table = VarTable::new(entries)?;
    let s = |n: &str| table.sym(n);
    let structure = CanonicalStructure::from_names(&table, &[("q1", "p1"), ("q2", "p2")])?;
    let k1 = parse_poly(&table, PDE_K1)?;
    let k2 = parse_poly(&table, PDE_K2)?;
    let k3 = parse_poly(&table, PDE_K3_UNCORRECTED)? + parse_poly(&table, PDE_K3_CORRECTION)?;
    let relation = AffineRelation::new(&table, vec![(s("a0")?, qi(1)), (s("a1")?, qi(1))], qi(0), s("a1")?)?;
    let divisors = vec![
        Divisor { name: "f0".into(), poly: parse_poly(&table, "q1 + q2^2")?, param: s("a0")? },
        Divisor { name: "f1".into(), poly: parse_poly(&table, "q1 + p1^2 + p2^2")?, param: s("a1")? },
    ];
    Ok(HamiltonianSystem {
        id: SystemId::PdeA1_1,
        hamiltonians: vec![(s("t1")?, k1), (s("t2")?, k2), (s("t3")?, k3)],
        table,
        structure,
        relation,
        divisors,
        generators: vec!["s0".into(), "s1".into()],
    })
}

/// The third PDE Hamiltonian without the two quartic terms needed for
/// commutation. Kept for regression tests.
pub fn k3_uncorrected(sys: &HamiltonianSystem) -> Result<Polynomial> {
    if sys.id != SystemId::PdeA1_1 {
        return Err(Error::InvalidArgument(format!("{} has no K3", sys.id)));
    }
    parse_poly(&sys.table, PDE_K3_UNCORRECTED)
}

pub fn divisor_table(sys: &HamiltonianSystem) -> Vec<(Polynomial, Sym)> {
    sys.divisors.iter().map(|d| (d.poly.clone(), d.param)).collect()
}

/// Exact parameter values satisfying the system relation.
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterValues {
    pub system: SystemId,
    values: Vec<(Sym, Rational)>,
}

impl ParameterValues {
    /// All parameters in table order; the relation is checked exactly.
    pub fn new(sys: &HamiltonianSystem, values: &[Rational]) -> Result<ParameterValues> {
        let params = sys.params();
        if values.len() != params.len() {
            return Err(Error::InvalidArgument(format!(
                "{} expects {} parameters, got {}",
                sys.id,
                params.len(),
                values.len()
            )));
        }
        let pv = ParameterValues { system: sys.id, values: params.into_iter().zip(values.iter().cloned()).collect() };
        sys.relation.check(|s| pv.get(s))?;
        Ok(pv)
    }

    /// Parameters other than the eliminated one; the eliminated value is solved.
    pub fn from_free(sys: &HamiltonianSystem, free: &[Rational]) -> Result<ParameterValues> {
        let elim = sys.relation.eliminated();
        let others: Vec<Sym> = sys.params().into_iter().filter(|&s| s != elim).collect();
        if free.len() != others.len() {
            return Err(Error::InvalidArgument(format!(
                "{} expects {} free parameters, got {}",
                sys.id,
                others.len(),
                free.len()
            )));
        }
        let bound: Vec<(Sym, Rational)> = others.into_iter().zip(free.iter().cloned()).collect();
        let rule = sys.relation.solve_for(elim)?;
        let v = rule.evaluate(|s| bound.iter().find(|(k, _)| *k == s).map(|(_, v)| v.clone()))?;
        let mut all = Vec::new();
        for p in sys.params() {
            if p == elim {
                all.push(v.clone());
            } else {
                all.push(bound.iter().find(|(k, _)| *k == p).expect("bound").1.clone());
            }
        }
        ParameterValues::new(sys, &all)
    }

    pub fn get(&self, s: Sym) -> Option<Rational> {
        self.values.iter().find(|(k, _)| *k == s).map(|(_, v)| v.clone())
    }

    pub fn values(&self) -> &[(Sym, Rational)] {
        &self.values
    }

    pub fn as_vec(&self) -> Vec<Rational> {
        self.values.iter().map(|(_, v)| v.clone()).collect()
    }
}

/// Exact value of the Hamiltonian of `time` at a fully bound state.
pub fn evaluate_hamiltonian(sys: &HamiltonianSystem, time: Sym, state: &[(Sym, Rational)]) -> Result<Rational> {
    let h = sys.hamiltonian(time)?;
    let get = |s: Sym| state.iter().find(|(k, _)| *k == s).map(|(_, v)| v.clone());
    for s in sys.dynamical().into_iter().chain(sys.times()).chain(sys.params()) {
        if get(s).is_none() {
            return Err(Error::Unbound(sys.table.name(s).to_string()));
        }
    }
    sys.relation.check(get)?;
    h.evaluate(get)
}

/// Total degree in the dynamical symbols only.
pub fn dynamical_degree(sys: &HamiltonianSystem, p: &Polynomial) -> u32 {
    p.degree_in_set(&sys.dynamical())
}
