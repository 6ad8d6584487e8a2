//! Numerical test battery: path commutation, Bäcklund transport and the
//! scalar-equation residuals.

use serde::Serialize;

use crate::catalog::{HamiltonianSystem, ParameterValues, SystemId};
use crate::error::{Error, Result};
use crate::flows::{hamiltonian_vector_field, reduction_map, scalar_rhs_in_xyzw};
use crate::symkernel::{RationalExpr, Substitution, Sym};
use crate::weyl::BirationalMap;

use super::eval::Evaluator;
use super::integrate::{integrate, Guards, Method, Options, Trajectory};

fn require_pde(sys: &HamiltonianSystem) -> Result<()> {
    if sys.id != SystemId::PdeA1_1 {
        return Err(Error::InvalidArgument(format!("{} is not the multi-time system", sys.id)));
    }
    Ok(())
}

fn bound(e: &RationalExpr, params: &ParameterValues) -> Result<RationalExpr> {
    e.evaluate_partial(params.values())
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn leg(
    sys: &HamiltonianSystem,
    time: Sym,
    y0: &[f64],
    params: &ParameterValues,
    delta: f64,
    opts: &Options,
) -> Result<Vec<f64>> {
    let tr = integrate(sys, time, y0, params, (0.0, delta), opts)?;
    if let Some(msg) = tr.aborted {
        return Err(Error::GuardTriggered(msg));
    }
    Ok(tr.last_state().to_vec())
}

/// Flows `t_i` then `t_j` by `delta`, and the other way round; returns the
/// max-norm distance between the two endpoints.
pub fn path_commutation_check(
    sys: &HamiltonianSystem,
    initial: &[f64],
    params: &ParameterValues,
    delta: f64,
    order: (usize, usize),
    tol: f64,
    guards: Guards,
) -> Result<f64> {
    require_pde(sys)?;
    let times = sys.times();
    let pick = |k: usize| {
        times
            .get(k.wrapping_sub(1))
            .copied()
            .ok_or_else(|| Error::InvalidArgument(format!("time index {k} outside 1..={}", times.len())))
    };
    let (ti, tj) = (pick(order.0)?, pick(order.1)?);
    let mut opts = Options::new(Method::Rk45 { atol: tol, rtol: tol });
    opts.guards = guards;
    let a = leg(sys, tj, &leg(sys, ti, initial, params, delta, &opts)?, params, delta, &opts)?;
    let b = leg(sys, ti, &leg(sys, tj, initial, params, delta, &opts)?, params, delta, &opts)?;
    Ok(max_abs_diff(&a, &b))
}

#[derive(Clone, Debug, Serialize)]
pub struct BacklundReport {
    pub generator: String,
    pub sup_error: f64,
    pub compared: usize,
    pub image_params: Vec<String>,
    /// Set when the map or either integration hit a guard; the error then
    /// covers only the samples before that point.
    pub guarded: Option<String>,
}

/// Transports a reference trajectory through `map` and compares it with a
/// fresh integration from the mapped initial state at the mapped parameters.
pub fn backlund_solution_check(
    sys: &HamiltonianSystem,
    map: &BirationalMap,
    time: Sym,
    initial: &[f64],
    params: &ParameterValues,
    span: (f64, f64),
    opts: &Options,
) -> Result<BacklundReport> {
    if map.system != sys.id {
        return Err(Error::InvalidArgument("map belongs to another system".into()));
    }
    let image_alpha = map.param_action().apply(&params.as_vec());
    let image_params = ParameterValues::new(sys, &image_alpha)?;

    let rules = map.rules()?;
    let exprs = rules.iter().map(|(_, e)| bound(e, params)).collect::<Result<Vec<_>>>()?;
    let mut inputs = sys.dynamical();
    inputs.push(time);
    let ev = Evaluator::new(&exprs, &inputs)?;
    let mut pows = ev.scratch();
    let mut x = vec![0.0; inputs.len()];
    let mut image = |t: f64, y: &[f64]| -> (Vec<f64>, f64) {
        x[..y.len()].copy_from_slice(y);
        x[y.len()] = t;
        let mut out = vec![0.0; ev.outputs()];
        let d = ev.eval_with(&x, &mut out, &mut pows);
        (out, d)
    };

    let tau = integrate(sys, time, initial, params, span, opts)?;
    let mut guarded = tau.aborted.clone();
    let (start, d0) = image(span.0, initial);
    if d0 < opts.guards.denominator {
        return Err(Error::GuardTriggered(format!("{} is singular at the initial state", map.name)));
    }
    let tau_img = integrate(sys, time, &start, &image_params, span, opts)?;
    if guarded.is_none() {
        guarded = tau_img.aborted.clone();
    }

    let mut sup: f64 = 0.0;
    let mut compared = 0;
    for s in &tau.samples {
        let (mapped, d) = image(s.t, &s.state);
        if d < opts.guards.denominator {
            guarded.get_or_insert_with(|| format!("{} divisor vanishes near t = {}", map.name, s.t));
            break;
        }
        let Some(other) = tau_img.interpolate(s.t) else { break };
        sup = sup.max(max_abs_diff(&mapped, &other));
        compared += 1;
    }
    Ok(BacklundReport {
        generator: map.name.clone(),
        sup_error: sup,
        compared,
        image_params: image_params.as_vec().iter().map(crate::symkernel::format_rational).collect(),
        guarded,
    })
}

/// Residuals of the three scalar equations along states of the `t1` flow.
#[derive(Clone, Debug, Serialize)]
pub struct ScalarResiduals {
    /// Per equation, in time order `t1`, `t2`, `t3`.
    pub max: [f64; 3],
    /// Largest disagreement between the two evaluations of the `t2` residual.
    pub second_two_ways: f64,
    pub evaluated: usize,
    pub skipped: usize,
}

/// Compiled pieces of the scalar-equation check; reusable across states.
#[derive(Clone, Debug)]
pub struct ScalarResidualProbe {
    forward: Evaluator,
    /// Chain-rule derivatives in the old coordinates: y along t1, z along t2, z along t3.
    chain: Evaluator,
    /// Scalar right sides in the new coordinates.
    scalar: Evaluator,
    /// Pushforward of z along t2 in the new coordinates.
    pushed_z_t2: Evaluator,
}

impl ScalarResidualProbe {
    pub fn new(sys: &HamiltonianSystem, params: &ParameterValues) -> Result<ScalarResidualProbe> {
        require_pde(sys)?;
        let t = &sys.table;
        let change = reduction_map(sys)?;
        let fwd = |name: &str| -> Result<RationalExpr> {
            let s = t.sym(name)?;
            Ok(change.forward.iter().find(|(k, _)| *k == s).expect("forward rule").1.clone())
        };
        let old = sys.dynamical();
        let new = vec![t.sym("x")?, t.sym("y")?, t.sym("z")?, t.sym("w")?];

        let forward_exprs = new
            .iter()
            .map(|&s| bound(&change.forward.iter().find(|(k, _)| *k == s).expect("forward rule").1, params))
            .collect::<Result<Vec<_>>>()?;
        let forward = Evaluator::new(&forward_exprs, &old)?;

        let times = sys.times();
        let along = |k: usize, name: &str| -> Result<RationalExpr> {
            let f = hamiltonian_vector_field(sys, times[k])?;
            bound(&f.derivative_of(&fwd(name)?)?, params)
        };
        let chain_exprs = [along(0, "y")?, along(1, "z")?, along(2, "z")?];
        let chain = Evaluator::new(&chain_exprs, &old)?;

        let scalar_exprs = scalar_rhs_in_xyzw(sys)?.iter().map(|e| bound(e, params)).collect::<Result<Vec<_>>>()?;
        let scalar = Evaluator::new(&scalar_exprs, &new)?;

        let inv = Substitution::new(t, &change.inverse)?;
        let pushed = sys.relation.reduce(&inv.apply(&along(1, "z")?)?)?;
        let pushed_z_t2 = Evaluator::new(&[bound(&pushed, params)?], &new)?;
        Ok(ScalarResidualProbe { forward, chain, scalar, pushed_z_t2 })
    }

    /// New coordinates `(x, y, z, w) = (u'', u''', u, u')` of an old state.
    pub fn new_coordinates(&self, state: &[f64]) -> Vec<f64> {
        self.forward.eval(state).0
    }

    /// Residuals over a batch of old-coordinate states.
    pub fn residuals(&self, states: &[Vec<f64>], skip: f64) -> Result<ScalarResiduals> {
        let mut r = ScalarResiduals { max: [0.0; 3], second_two_ways: 0.0, evaluated: 0, skipped: 0 };
        for st in states {
            let xyzw = self.new_coordinates(st);
            let (x, z) = (xyzw[0], xyzw[2]);
            if (8.0 * z * z * z + z - 4.0 * x).abs() < skip || z.abs() < skip {
                r.skipped += 1;
                continue;
            }
            let (chain, _) = self.chain.eval(st);
            let (scalar, _) = self.scalar.eval(&xyzw);
            let (pushed, _) = self.pushed_z_t2.eval(&xyzw);
            for k in 0..3 {
                r.max[k] = r.max[k].max((scalar[k] - chain[k]).abs());
            }
            let via_chain = scalar[1] - chain[1];
            let via_push = scalar[1] - pushed[0];
            r.second_two_ways = r.second_two_ways.max((via_chain - via_push).abs());
            r.evaluated += 1;
        }
        if r.evaluated == 0 {
            return Err(Error::GuardTriggered("every sample lies near the singular locus".into()));
        }
        Ok(r)
    }
}

/// Scalar-equation residuals along a trajectory of the `t1` flow.
pub fn scalar_residual_check(
    sys: &HamiltonianSystem,
    traj: &Trajectory,
    params: &ParameterValues,
    guards: Guards,
) -> Result<ScalarResiduals> {
    require_pde(sys)?;
    if traj.system != Some(sys.id) || traj.time != "t1" {
        return Err(Error::InvalidArgument("expected a trajectory of the t1 flow".into()));
    }
    let probe = ScalarResidualProbe::new(sys, params)?;
    let states: Vec<Vec<f64>> = traj.samples.iter().map(|s| s.state.clone()).collect();
    probe.residuals(&states, guards.residual_skip)
}
