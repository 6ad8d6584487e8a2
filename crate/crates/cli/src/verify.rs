//! Symbolic verification suites and their report.

use painleve_core::catalog::{HamiltonianSystem, SystemId};
use painleve_core::flows::{divisor_invariance, hamiltonian_vector_field, lie_bracket};
use painleve_core::holomorphy::{charts, check_polynomiality, Polynomiality};
use painleve_core::symkernel::{format_rational, poisson_bracket_poly, qi, IdentityMode, Polynomial, RationalExpr};
use painleve_core::weyl::{
    compose, exponential_formula_check, generators, maps_agree, relation_order, translation, translation_offset,
    verify_symmetry, BirationalMap, RelationOrder,
};
use painleve_core::Exec;
use serde::Serialize;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Symmetry,
    Relations,
    Holomorphy,
    Divisors,
    Brackets,
    All,
}

impl Suite {
    fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![Suite::Symmetry, Suite::Relations, Suite::Holomorphy, Suite::Divisors, Suite::Brackets],
            s => vec![s],
        }
    }

    fn name(self) -> &'static str {
        match self {
            Suite::Symmetry => "symmetry",
            Suite::Relations => "relations",
            Suite::Holomorphy => "holomorphy",
            Suite::Divisors => "divisors",
            Suite::Brackets => "brackets",
            Suite::All => "all",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub system: SystemId,
    pub suite: String,
    pub seed: u64,
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.failed == 0
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["suite", "check", "pass", "detail"])?;
        for c in &self.checks {
            w.write_record([
                c.suite.as_str(),
                c.name.as_str(),
                if c.pass { "true" } else { "false" },
                c.detail.as_str(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

struct Collector {
    suite: &'static str,
    checks: Vec<Check>,
}

impl Collector {
    fn push(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check { suite: self.suite.into(), name: name.into(), pass, detail: detail.into() });
    }
}

pub fn run(sys: &HamiltonianSystem, suite: Suite, seed: u64, exec: Exec) -> Result<Report, CliError> {
    let mut checks = Vec::new();
    for s in suite.expand() {
        let mut c = Collector { suite: s.name(), checks: Vec::new() };
        match s {
            Suite::Symmetry => symmetry(sys, &mut c, exec)?,
            Suite::Relations => relations(sys, &mut c, seed)?,
            Suite::Holomorphy => holomorphy(sys, &mut c)?,
            Suite::Divisors => divisors(sys, &mut c)?,
            Suite::Brackets => brackets(sys, &mut c)?,
            Suite::All => unreachable!("expanded above"),
        }
        checks.extend(c.checks);
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    Ok(Report { system: sys.id, suite: suite.name().into(), seed, passed: checks.len() - failed, failed, checks })
}

fn symmetry(sys: &HamiltonianSystem, c: &mut Collector, exec: Exec) -> Result<(), CliError> {
    for g in generators(sys)? {
        for e in verify_symmetry(sys, &g, exec)?.entries {
            c.push(format!("{} {} {}", e.generator, e.time, e.variable), e.pass, e.witness.unwrap_or_default());
        }
    }
    // the exponential series must rebuild every generator component
    for (i, g) in sys.generators.iter().enumerate() {
        for v in sys.dynamical() {
            let rep = exponential_formula_check(sys, i, &Polynomial::var(&sys.table, v), 6)?;
            let order = rep.terminated_at.map_or("none".to_string(), |n| n.to_string());
            let pass = rep.matches_generator && rep.terminated_at.is_some_and(|n| n <= 2);
            c.push(format!("exp series {g}({})", sys.table.name(v)), pass, format!("terminates at order {order}"));
        }
    }
    Ok(())
}

/// Offsets of the named translations on the relation.
fn expected_translations(id: SystemId) -> Vec<(&'static str, Vec<i64>)> {
    match id {
        SystemId::A4_2 => vec![("T1", vec![-2, 1, 0]), ("T2", vec![0, -1, 1])],
        SystemId::A1_1 => vec![("T", vec![-2, 2])],
        // s1 s0 shifts by 2(a0 + a1)(-1, 1), which is zero on a0 + a1 = 0
        SystemId::PdeA1_1 => vec![("T", vec![0, 0])],
    }
}

fn fmt_offset(off: &[painleve_core::symkernel::Rational]) -> String {
    format!("({})", off.iter().map(format_rational).collect::<Vec<_>>().join(", "))
}

fn relations(sys: &HamiltonianSystem, c: &mut Collector, seed: u64) -> Result<(), CliError> {
    let id_map = BirationalMap::identity(sys);
    for g in generators(sys)? {
        let sq = compose(&g, &g)?;
        let pass = sq.param_action().is_identity() && maps_agree(sys, &sq, &id_map, IdentityMode::Symbolic)?;
        c.push(format!("{0} {0} = id", g.name), pass, "");
    }
    for (name, want) in expected_translations(sys.id) {
        let want: Vec<_> = want.into_iter().map(qi).collect();
        let got = translation_offset(sys, &translation(sys, name)?)?;
        let detail = got.as_deref().map_or("not a translation".to_string(), fmt_offset);
        c.push(
            format!("{name} offset"),
            got.as_deref() == Some(&want[..]),
            format!("{detail}, expected {}", fmt_offset(&want)),
        );
    }
    if sys.id == SystemId::A4_2 {
        let t1 = translation(sys, "T1")?;
        let t2 = translation(sys, "T2")?;
        let (a, b) = (compose(&t1, &t2)?, compose(&t2, &t1)?);
        let pass = a.param_action() == b.param_action() && maps_agree(sys, &a, &b, IdentityMode::sampled(seed))?;
        c.push("T1 T2 = T2 T1", pass, "parameters exact, variables sampled");
    }
    let expected: Vec<(usize, usize, Option<u32>)> = match sys.id {
        SystemId::A4_2 => vec![(0, 2, Some(2))],
        SystemId::A1_1 => vec![(0, 1, None)],
        SystemId::PdeA1_1 => vec![],
    };
    for (i, j, want) in expected {
        let got = relation_order(sys, i, j, 8, seed)?;
        let (pass, detail) = match (&got, want) {
            (RelationOrder::Found { n }, Some(w)) => (*n == w, format!("order {n}")),
            (RelationOrder::ExceedsMax { reason, .. }, None) => (reason.contains("translation"), reason.clone()),
            (other, _) => (false, format!("{other:?}")),
        };
        c.push(format!("order of s{i} s{j}"), pass, detail);
    }
    Ok(())
}

fn holomorphy(sys: &HamiltonianSystem, c: &mut Collector) -> Result<(), CliError> {
    for ch in charts(sys)? {
        for (t, k) in &sys.hamiltonians {
            let ham =
                if sys.hamiltonians.len() == 1 { "H".to_string() } else { format!("K{}", &sys.table.name(*t)[1..]) };
            let label = if ch.correction.is_zero() { ham } else { format!("{ham} + {}", ch.correction) };
            let (pass, detail) = match check_polynomiality(&ch, k)? {
                Polynomiality::Polynomial(p) => (true, format!("{} terms", p.len())),
                Polynomiality::Witness(w) => {
                    (false, format!("denominator {}; negative terms {}", w.denominator, w.residual_terms.join(" ")))
                }
            };
            c.push(format!("{}({label})", ch.name), pass, detail);
        }
    }
    Ok(())
}

fn divisors(sys: &HamiltonianSystem, c: &mut Collector) -> Result<(), CliError> {
    for t in sys.times() {
        for i in 0..sys.divisors.len() {
            let r = divisor_invariance(sys, t, i)?;
            let detail = match &r.cofactor {
                Some(q) => {
                    format!("cofactor {q}, parameter coefficient {}", r.parameter_coefficient.as_deref().unwrap_or("0"))
                }
                None => "not divisible".into(),
            };
            c.push(format!("d{}/d{} in ({})", r.divisor, r.time, r.polynomial), r.remainder_zero, detail);
        }
    }
    Ok(())
}

fn brackets(sys: &HamiltonianSystem, c: &mut Collector) -> Result<(), CliError> {
    let n = sys.hamiltonians.len();
    let name = |k: usize| format!("K{}", &sys.table.name(sys.hamiltonians[k].0)[1..]);
    for i in 0..n {
        for j in i + 1..n {
            let b = poisson_bracket_poly(&sys.hamiltonians[i].1, &sys.hamiltonians[j].1, &sys.structure)?;
            let b = sys.relation.reduce_poly(&b)?;
            c.push(
                format!("{{{}, {}}}", name(i), name(j)),
                b.is_zero(),
                if b.is_zero() { "0".into() } else { b.to_string() },
            );
        }
    }
    let fields = sys.times().into_iter().map(|t| hamiltonian_vector_field(sys, t)).collect::<Result<Vec<_>, _>>()?;
    for i in 0..n {
        for j in i + 1..n {
            let br = lie_bracket(&fields[i], &fields[j])?.reduced(&sys.relation)?;
            c.push(
                format!("[X{}, X{}]", i + 1, j + 1),
                br.is_zero(),
                if br.is_zero() { "zero field" } else { "nonzero" },
            );
        }
    }
    if n > 1 {
        for (m, (_, k)) in sys.hamiltonians.iter().enumerate() {
            for (j, f) in fields.iter().enumerate() {
                let d = sys.relation.reduce(&f.derivative_of(&RationalExpr::from_poly(k.clone()))?)?;
                c.push(
                    format!("d{}/dt{}", name(m), j + 1),
                    d.is_zero(),
                    if d.is_zero() { "0".into() } else { d.to_string() },
                );
            }
        }
    }
    Ok(())
}
