//! Hamiltonian vector fields, their brackets, divisor dynamics and the
//! pushforward of the multi-time flows to the scalar fourth-order equation.

use num_traits::Zero;
use serde::Serialize;

use crate::catalog::{HamiltonianSystem, SystemId};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::holomorphy::invert_rules;
use crate::symkernel::{
    parse_expr, poisson_bracket, AffineRelation, CanonicalStructure, Polynomial, RationalExpr, Substitution, Sym,
};

#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub time: Sym,
    components: Vec<(Sym, RationalExpr)>,
}

impl VectorField {
    pub fn new(time: Sym, components: Vec<(Sym, RationalExpr)>) -> VectorField {
        VectorField { time, components }
    }

    pub fn components(&self) -> &[(Sym, RationalExpr)] {
        &self.components
    }

    pub fn component(&self, v: Sym) -> Option<&RationalExpr> {
        self.components.iter().find(|(k, _)| *k == v).map(|(_, e)| e)
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|(_, e)| e.is_zero())
    }

    /// Components rewritten with the relation's eliminated parameter removed.
    pub fn reduced(&self, relation: &AffineRelation) -> Result<VectorField> {
        let comps = self.components.iter().map(|(s, e)| Ok((*s, relation.reduce(e)?))).collect::<Result<Vec<_>>>()?;
        Ok(VectorField::new(self.time, comps))
    }

    /// Lie derivative of a scalar: `sum_u X_u df/du + df/dt`.
    pub fn derivative_of(&self, f: &RationalExpr) -> Result<RationalExpr> {
        let mut acc = f.differentiate(self.time)?;
        for (u, xu) in &self.components {
            let d = f.differentiate(*u)?;
            if !d.is_zero() {
                acc = acc.checked_add(&d.checked_mul(xu)?)?;
            }
        }
        Ok(acc)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let t = self.components.first().map(|(_, e)| e.table().clone());
        let name = |s: Sym| t.as_ref().map(|t| t.name(s).to_string()).unwrap_or_default();
        serde_json::json!({
            "time": name(self.time),
            "components": self.components.iter().map(|(s, e)| serde_json::json!({
                "variable": name(*s),
                "rhs": e.to_string(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Hamilton's equations from partial derivatives: `dq/dt = dH/dp`, `dp/dt = -dH/dq`.
pub fn field_from_hamiltonian(s: &CanonicalStructure, time: Sym, h: &Polynomial) -> Result<VectorField> {
    let mut comps = Vec::new();
    for &(q, p) in s.pairs() {
        comps.push((q, RationalExpr::from_poly(h.differentiate(p))));
        comps.push((p, RationalExpr::from_poly(-h.differentiate(q))));
    }
    Ok(VectorField::new(time, comps))
}

/// Same field built as `dv/dt = {H, v}`.
pub fn field_from_bracket(s: &CanonicalStructure, time: Sym, h: &Polynomial) -> Result<VectorField> {
    let hr = RationalExpr::from_poly(h.clone());
    let comps: Result<Vec<(Sym, RationalExpr)>> = s
        .variables()
        .into_iter()
        .map(|v| Ok((v, poisson_bracket(&hr, &RationalExpr::var(s.table(), v), s)?)))
        .collect();
    Ok(VectorField::new(time, comps?))
}

pub fn hamiltonian_vector_field(sys: &HamiltonianSystem, time: Sym) -> Result<VectorField> {
    field_from_hamiltonian(&sys.structure, time, sys.hamiltonian(time)?)
}

/// `[f, g]_v = sum_u (f_u dg_v/du - g_u df_v/du)`.
pub fn lie_bracket(f: &VectorField, g: &VectorField) -> Result<VectorField> {
    let mut comps = Vec::new();
    for (v, gv) in g.components() {
        let fv = f.component(*v).ok_or_else(|| Error::InvalidArgument("fields have different components".into()))?;
        let mut acc = RationalExpr::zero(gv.table());
        for (u, fu) in f.components() {
            let gu = g.component(*u).expect("same components");
            let a = gv.differentiate(*u)?;
            if !a.is_zero() {
                acc = acc.checked_add(&fu.checked_mul(&a)?)?;
            }
            let b = fv.differentiate(*u)?;
            if !b.is_zero() {
                acc = acc.checked_sub(&gu.checked_mul(&b)?)?;
            }
        }
        comps.push((*v, acc));
    }
    Ok(VectorField::new(f.time, comps))
}

#[derive(Clone, Debug, Serialize)]
pub struct DivisorReport {
    pub system: SystemId,
    pub divisor: String,
    pub polynomial: String,
    pub time: String,
    pub derivative: String,
    /// Cofactor `c` with `df/dt = c f` once the paired parameter is zero.
    pub cofactor: Option<String>,
    pub remainder_zero: bool,
    /// Constant `k` in `df/dt = c f + k a_i`, when that identity holds exactly.
    pub parameter_coefficient: Option<String>,
}

/// `df_i/dt` along the flow, divided by `f_i` after setting `a_i = 0`.
pub fn divisor_invariance(sys: &HamiltonianSystem, time: Sym, i: usize) -> Result<DivisorReport> {
    let d = sys.divisor(i)?;
    let field = hamiltonian_vector_field(sys, time)?;
    let deriv = field.derivative_of(&RationalExpr::from_poly(d.poly.clone()))?;
    let deriv = deriv
        .as_polynomial()
        .cloned()
        .ok_or_else(|| Error::InvalidStructure("polynomial field produced a fraction".into()))?;
    // express the derivative with a_i kept and another parameter eliminated
    let other = sys
        .relation
        .coefficients()
        .iter()
        .find(|(s, c)| *s != d.param && !c.is_zero())
        .map(|(s, _)| *s)
        .ok_or_else(|| Error::RelationNotSolvable(sys.table.name(d.param).to_string()))?;
    let rel = sys.relation.with_eliminated(other)?;
    let deriv = rel.reduce_poly(&deriv)?;
    let at_zero = deriv.evaluate_partial(&[(d.param, crate::symkernel::qi(0))]);
    let cofactor = at_zero.exact_divide(&d.poly)?;
    let parameter_coefficient = match &cofactor {
        Some(c) => {
            let rest = &deriv - &(c * &d.poly);
            let a = Polynomial::var(&sys.table, d.param);
            let coeffs = rest.coefficients_in(d.param);
            match coeffs.as_slice() {
                [c0] if c0.is_zero() => Some("0".to_string()),
                [c0, c1] if c0.is_zero() && c1.is_constant() && rest == &a * c1 => Some(c1.to_string()),
                _ => None,
            }
        }
        None => None,
    };
    Ok(DivisorReport {
        system: sys.id,
        divisor: d.name.clone(),
        polynomial: d.poly.to_string(),
        time: sys.table.name(time).to_string(),
        derivative: deriv.to_string(),
        remainder_zero: cofactor.is_some(),
        cofactor: cofactor.map(|c| c.to_string()),
        parameter_coefficient,
    })
}

/// Birational change of dependent variables with a populated inverse.
#[derive(Clone, Debug)]
pub struct CoordinateChange {
    /// New symbol -> expression in old symbols.
    pub forward: Vec<(Sym, RationalExpr)>,
    /// Old symbol -> expression in new symbols.
    pub inverse: Vec<(Sym, RationalExpr)>,
}

/// The map from `(q1, p1, q2, p2)` to `(x, y, z, w)` taking the PDE system
/// to the autonomous A1 system; the inverse is solved, not transcribed.
pub fn reduction_map(sys: &HamiltonianSystem) -> Result<CoordinateChange> {
    if sys.id != SystemId::PdeA1_1 {
        return Err(Error::InvalidArgument(format!("{} has no reduction map", sys.id)));
    }
    let t = &sys.table;
    let forward = vec![
        (t.sym("x")?, parse_expr(t, "1/4*q2 - 2*q1*q2")?),
        (t.sym("y")?, parse_expr(t, "-1/8*p2 + q1*p2 + 1/4*p1*q2 - 6*q1*p1*q2 - 2*q2^2*p2 + 2*a0*q2")?),
        (t.sym("z")?, parse_expr(t, "q2")?),
        (t.sym("w")?, parse_expr(t, "-1/2*p2 + p1*q2")?),
    ];
    let inverse = invert_rules(t, &forward, &sys.dynamical())?;
    Ok(CoordinateChange { forward, inverse })
}

/// `dv/dt_k = sum_u dm(v)/du * X_u`, re-expressed in the new symbols and
/// reduced on the parameter relation.
pub fn pushforward_field(
    sys: &HamiltonianSystem,
    change: &CoordinateChange,
    fields: &[VectorField],
    exec: Exec,
) -> Result<Vec<VectorField>> {
    if change.inverse.is_empty() {
        return Err(Error::MissingInverse);
    }
    let inv = Substitution::new(&sys.table, &change.inverse)?;
    // non-monomial pieces of the inverse denominators; monomials cancel on their own
    let mut factors: Vec<Polynomial> = Vec::new();
    for (_, e) in &change.inverse {
        let d = e.den();
        let f = d.div_monomial(&d.monomial_content()).unwrap_or_else(|| d.clone());
        if !f.is_constant() && !factors.contains(&f) {
            factors.push(f);
        }
    }
    let mut items = Vec::new();
    for (fi, f) in fields.iter().enumerate() {
        for (v, mv) in &change.forward {
            items.push((fi, *v, f.clone(), mv.clone()));
        }
    }
    let comps = exec.map(&items, |(_, v, f, mv)| -> Result<(Sym, RationalExpr)> {
        let mut acc = RationalExpr::zero(&sys.table);
        for (u, xu) in f.components() {
            let d = mv.differentiate(*u)?;
            if !d.is_zero() {
                acc = acc.checked_add(&d.checked_mul(xu)?)?;
            }
        }
        let e = inv.apply(&acc)?.cancel_factors(&factors)?;
        Ok((*v, sys.relation.reduce(&e)?))
    });
    let mut out: Vec<VectorField> = fields.iter().map(|f| VectorField::new(f.time, Vec::new())).collect();
    for ((fi, _, _, _), c) in items.iter().zip(comps) {
        out[*fi].components.push(c?);
    }
    Ok(out)
}

/// Closed-form right side of `dy/dt1` in the reduced coordinates.
pub const REFERENCE_Y_T1: &str = "(6*x^2*w^2 - 2*x*z*w^2 - 12*x^3*z - 4*x*y*z*w + 7*x^2*z^2 + 2*y*z^2*w \
    - 2*y^2*z^2 - 3/2*x*z^3 - 48*x*z^3*w^2 + 1/8*z^4 + 4*z^4*w^2 + 24*x^2*z^4 + 32*y*z^4*w \
    - 12*x*z^5 + 2*z^6 + 8*z^8 + 8*a0^2*z^4) / (z^2*(8*z^3 + z - 4*x))";

/// Scalar equations in `u` and `u1 = u_t1`, `u2 = u_t1t1`, `u3 = u_t1t1t1`.
pub const SCALAR_T1: &str = "(6*u2^2*u1^2 - 2*u2*u*u1^2 - 12*u2^3*u - 4*u2*u3*u*u1 + 7*u2^2*u^2 \
    + 2*u3*u^2*u1 - 2*u3^2*u^2 - 3/2*u2*u^3 - 48*u2*u^3*u1^2 + 1/8*u^4 + 4*u^4*u1^2 + 24*u2^2*u^4 \
    + 32*u3*u^4*u1 - 12*u2*u^5 + 2*u^6 + 8*u^8 + 8*a0^2*u^4) / (u^2*(8*u^3 + u - 4*u2))";
pub const SCALAR_T2: &str = "-3/2*u1 - u3 + 3*u2*u1/u";
pub const SCALAR_T3: &str = "(32*u2^2*u1^3 - 64*u2^3*u*u1 - 64*u2*u3*u*u1^2 + 48*u2^2*u^2*u1 \
    + 32*u3^2*u^2*u1 - 12*u2*u^3*u1 + 512*u2*u^3*u1^3 + u^4*u1 - 64*u^4*u1^3 + 128*u2^2*u^4*u1 \
    - 256*u3*u^4*u1^2 - 128*u2*u^5*u1 + 24*u^6*u1 + 128*u^8*u1 + 32*a0*u2*u^4 - 8*a0*u^5 \
    + 128*a0*u2*u^6 - 96*a0*u^7 - 256*a0*u^9 - 128*a0^2*u^4*u1 + 32*a1*u2*u^4 - 8*a1*u^5 \
    + 128*a1*u2*u^6 - 96*a1*u^7 - 256*a1*u^9) / (64*u^3*(8*u^3 + u - 4*u2))";

/// Pushforward of the three PDE flows under the reduction map, in time order.
pub fn reduced_fields(sys: &HamiltonianSystem, exec: Exec) -> Result<(CoordinateChange, Vec<VectorField>)> {
    let change = reduction_map(sys)?;
    let fields: Result<Vec<VectorField>> = sys.times().into_iter().map(|t| hamiltonian_vector_field(sys, t)).collect();
    let pf = pushforward_field(sys, &change, &fields?, exec)?;
    Ok((change, pf))
}

/// The three scalar right sides rewritten in `(x, y, z, w)`.
pub fn scalar_rhs_in_xyzw(sys: &HamiltonianSystem) -> Result<[RationalExpr; 3]> {
    let t = &sys.table;
    let rules = vec![
        (t.sym("u")?, RationalExpr::var(t, t.sym("z")?)),
        (t.sym("u1")?, RationalExpr::var(t, t.sym("w")?)),
        (t.sym("u2")?, RationalExpr::var(t, t.sym("x")?)),
        (t.sym("u3")?, RationalExpr::var(t, t.sym("y")?)),
    ];
    let sub = Substitution::new(t, &rules)?;
    let f = |src: &str| -> Result<RationalExpr> { sys.relation.reduce(&sub.apply(&parse_expr(t, src)?)?) };
    Ok([f(SCALAR_T1)?, f(SCALAR_T2)?, f(SCALAR_T3)?])
}

#[derive(Clone, Debug, Serialize)]
pub struct ReductionEntry {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReductionReport {
    pub entries: Vec<ReductionEntry>,
}

impl ReductionReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn get(&self, name: &str) -> Option<&ReductionEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

fn component(fields: &[VectorField], k: usize, v: Sym) -> Result<&RationalExpr> {
    fields
        .get(k)
        .and_then(|f| f.component(v))
        .ok_or_else(|| Error::InvalidArgument("missing pushforward component".into()))
}

/// Checks the reduced system: the `t1` flow is `x' = y, z' = w, w' = x`
/// with the reference `y'`, and the scalar equations reproduce `y'` along
/// `t1` and `z'` along `t2` and `t3`.
pub fn scalar_reduction_identity(sys: &HamiltonianSystem, exec: Exec) -> Result<ReductionReport> {
    let t = &sys.table;
    let (_, pf) = reduced_fields(sys, exec)?;
    let (x, y, z, w) = (t.sym("x")?, t.sym("y")?, t.sym("z")?, t.sym("w")?);
    let mut entries = Vec::new();
    let mut push = |name: &str, lhs: &RationalExpr, rhs: &RationalExpr| -> Result<()> {
        let pass = lhs.equals(rhs)?;
        entries.push(ReductionEntry {
            name: name.to_string(),
            pass,
            detail: if pass { lhs.to_string() } else { format!("{lhs} != {rhs}") },
        });
        Ok(())
    };
    push("x_t1 = y", component(&pf, 0, x)?, &RationalExpr::var(t, y))?;
    push("z_t1 = w", component(&pf, 0, z)?, &RationalExpr::var(t, w))?;
    push("w_t1 = x", component(&pf, 0, w)?, &RationalExpr::var(t, x))?;
    let reference = sys.relation.reduce(&parse_expr(t, REFERENCE_Y_T1)?)?;
    push("y_t1 reference form", component(&pf, 0, y)?, &reference)?;
    let [s1, s2, s3] = scalar_rhs_in_xyzw(sys)?;
    push("scalar t1 (fourth order)", component(&pf, 0, y)?, &s1)?;
    push("scalar t2", component(&pf, 1, z)?, &s2)?;
    push("scalar t3", component(&pf, 2, z)?, &s3)?;
    Ok(ReductionReport { entries })
}

#[derive(Clone, Debug, Serialize)]
pub struct DerivedComponent {
    pub name: String,
    pub variable: String,
    pub time: String,
    pub expression: String,
    pub polynomial: bool,
}

/// The six components along `t2` and `t3` for `x`, `z` and `w`,
/// with a polynomiality flag for each.
pub fn derived_components(sys: &HamiltonianSystem, exec: Exec) -> Result<Vec<DerivedComponent>> {
    let t = &sys.table;
    let (_, pf) = reduced_fields(sys, exec)?;
    let mut out = Vec::new();
    let mut k = 1;
    for v in ["x", "z", "w"] {
        for time in [1usize, 2] {
            let e = component(&pf, time, t.sym(v)?)?;
            out.push(DerivedComponent {
                name: format!("f{k}"),
                variable: v.to_string(),
                time: t.name(pf[time].time).to_string(),
                expression: e.to_string(),
                polynomial: e.to_polynomial()?.is_some(),
            });
            k += 1;
        }
    }
    Ok(out)
}
