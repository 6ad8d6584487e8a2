//! Fixed-step RK4 and adaptive Dormand–Prince 5(4) with dense output.

use serde::{Deserialize, Serialize};

use crate::catalog::{HamiltonianSystem, ParameterValues, SystemId};
use crate::error::{Error, Result};
use crate::flows::hamiltonian_vector_field;
use crate::symkernel::{format_rational, RationalExpr, Sym};

use super::eval::{Evaluator, Scratch};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Method {
    Rk4 { step: f64 },
    Rk45 { atol: f64, rtol: f64 },
}

/// Thresholds for singular loci; policy, not physics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Guards {
    /// Abort integration when a compiled denominator falls below this.
    pub denominator: f64,
    /// Skip residual samples this close to a singular locus.
    pub residual_skip: f64,
}

impl Default for Guards {
    fn default() -> Self {
        Guards { denominator: 1e-10, residual_skip: 1e-6 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Options {
    pub method: Method,
    pub guards: Guards,
    pub max_steps: usize,
}

impl Options {
    pub fn new(method: Method) -> Options {
        Options { method, guards: Guards::default(), max_steps: 5_000_000 }
    }
}

/// Right side `dy/dt = F(y, t)` compiled for one flow.
#[derive(Clone, Debug)]
pub struct CompiledField {
    pub state: Vec<Sym>,
    pub time: Sym,
    eval: Evaluator,
}

impl CompiledField {
    /// `components` in state order; expressions may use the state and `time`.
    pub fn new(state: Vec<Sym>, time: Sym, components: &[RationalExpr]) -> Result<CompiledField> {
        let mut inputs = state.clone();
        inputs.push(time);
        let eval = Evaluator::new(components, &inputs)?;
        Ok(CompiledField { state, time, eval })
    }

    /// Hamiltonian flow of `time` with parameters bound exactly.
    pub fn hamiltonian(sys: &HamiltonianSystem, time: Sym, params: &ParameterValues) -> Result<CompiledField> {
        let field = hamiltonian_vector_field(sys, time)?;
        let bind = params.values().to_vec();
        let comps = field.components().iter().map(|(_, e)| e.evaluate_partial(&bind)).collect::<Result<Vec<_>>>()?;
        CompiledField::new(sys.dynamical(), time, &comps)
    }

    pub fn dim(&self) -> usize {
        self.state.len()
    }

    fn rhs(&self, t: f64, y: &[f64], out: &mut [f64], buf: &mut Workspace) -> f64 {
        buf.input[..y.len()].copy_from_slice(y);
        buf.input[y.len()] = t;
        self.eval.eval_with(&buf.input, out, &mut buf.pows)
    }

    fn workspace(&self) -> Workspace {
        Workspace { input: vec![0.0; self.dim() + 1], pows: self.eval.scratch() }
    }
}

struct Workspace {
    input: Vec<f64>,
    pows: Scratch,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub state: Vec<f64>,
}

/// Interpolation data between consecutive samples.
#[derive(Clone, Debug, PartialEq)]
pub enum Dense {
    /// Derivative at every sample, for cubic Hermite interpolation.
    Hermite(Vec<Vec<f64>>),
    /// Dormand–Prince continuous extension, five coefficient vectors per step.
    Dopri(Vec<[Vec<f64>; 5]>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub system: Option<SystemId>,
    pub time: String,
    pub state_names: Vec<String>,
    pub params: Vec<(String, String)>,
    pub method: Method,
    pub samples: Vec<Sample>,
    pub diagnostic_names: Vec<String>,
    /// One row per sample, aligned with `diagnostic_names`.
    pub diagnostics: Vec<Vec<f64>>,
    /// Reason the run stopped early, if it did.
    pub aborted: Option<String>,
    pub rejected_steps: usize,
    dense: Dense,
}

impl Trajectory {
    pub fn start(&self) -> f64 {
        self.samples.first().map_or(0.0, |s| s.t)
    }

    pub fn end(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    pub fn last_state(&self) -> &[f64] {
        &self.samples.last().expect("trajectory has a sample").state
    }

    pub fn diagnostic(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.diagnostic_names.iter().position(|n| n == name)?;
        Some(self.diagnostics.iter().map(|row| row[k]).collect())
    }

    /// State at `t` from the dense output; `None` outside the covered range.
    pub fn interpolate(&self, t: f64) -> Option<Vec<f64>> {
        let n = self.samples.len();
        if n == 0 || t < self.start() || t > self.end() {
            return None;
        }
        if n == 1 {
            return Some(self.samples[0].state.clone());
        }
        let i = match self.samples.binary_search_by(|s| s.t.total_cmp(&t)) {
            Ok(i) => return Some(self.samples[i].state.clone()),
            Err(i) => i - 1,
        };
        let (a, b) = (&self.samples[i], &self.samples[i + 1]);
        let h = b.t - a.t;
        let th = (t - a.t) / h;
        Some(match &self.dense {
            Dense::Hermite(f) => {
                let (h00, h10, h01, h11) = (
                    (1.0 + 2.0 * th) * (1.0 - th) * (1.0 - th),
                    th * (1.0 - th) * (1.0 - th),
                    th * th * (3.0 - 2.0 * th),
                    th * th * (th - 1.0),
                );
                (0..a.state.len())
                    .map(|k| h00 * a.state[k] + h10 * h * f[i][k] + h01 * b.state[k] + h11 * h * f[i + 1][k])
                    .collect()
            }
            Dense::Dopri(segs) => {
                let r = &segs[i];
                let th1 = 1.0 - th;
                (0..a.state.len())
                    .map(|k| r[0][k] + th * (r[1][k] + th1 * (r[2][k] + th * (r[3][k] + th1 * r[4][k]))))
                    .collect()
            }
        })
    }
}

fn check_initial(field: &CompiledField, y0: &[f64], span: (f64, f64)) -> Result<()> {
    if y0.len() != field.dim() {
        return Err(Error::InvalidArgument(format!(
            "initial state has {} entries, expected {}",
            y0.len(),
            field.dim()
        )));
    }
    if y0.iter().any(|v| !v.is_finite()) || !span.0.is_finite() || !span.1.is_finite() {
        return Err(Error::InvalidArgument("initial state and span must be finite".into()));
    }
    if span.1 < span.0 {
        return Err(Error::InvalidArgument("span must be increasing".into()));
    }
    Ok(())
}

/// Integrates a compiled field; diagnostics are left empty.
pub fn integrate_field(field: &CompiledField, y0: &[f64], span: (f64, f64), opts: &Options) -> Result<Trajectory> {
    check_initial(field, y0, span)?;
    let mut traj = match opts.method {
        Method::Rk4 { step } => rk4(field, y0, span, step, opts)?,
        Method::Rk45 { atol, rtol } => dopri5(field, y0, span, atol, rtol, opts)?,
    };
    traj.method = opts.method;
    Ok(traj)
}

fn empty_trajectory(method: Method, dense: Dense) -> Trajectory {
    Trajectory {
        system: None,
        time: String::new(),
        state_names: Vec::new(),
        params: Vec::new(),
        method,
        samples: Vec::new(),
        diagnostic_names: Vec::new(),
        diagnostics: Vec::new(),
        aborted: None,
        rejected_steps: 0,
        dense,
    }
}

fn guard_message(t: f64, d: f64) -> String {
    format!("denominator {d:.3e} below guard at t = {t}")
}

fn rk4(field: &CompiledField, y0: &[f64], span: (f64, f64), step: f64, opts: &Options) -> Result<Trajectory> {
    if step.is_nan() || step <= 0.0 {
        return Err(Error::InvalidArgument("rk4 step must be positive".into()));
    }
    let n = field.dim();
    let mut ws = field.workspace();
    let mut traj = empty_trajectory(opts.method, Dense::Hermite(Vec::new()));
    let mut derivs = Vec::new();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut t = span.0;
    let mut y = y0.to_vec();
    let d = field.rhs(t, &y, &mut k1, &mut ws);
    if d < opts.guards.denominator {
        traj.aborted = Some(guard_message(t, d));
    }
    traj.samples.push(Sample { t, state: y.clone() });
    derivs.push(k1.clone());
    let total = span.1 - span.0;
    let steps = (total / step).ceil() as usize;
    if steps > opts.max_steps {
        return Err(Error::InvalidArgument(format!("{steps} steps exceed the limit {}", opts.max_steps)));
    }
    for i in 0..steps {
        if traj.aborted.is_some() {
            break;
        }
        let t_next = if i + 1 == steps { span.1 } else { span.0 + (i + 1) as f64 * step };
        let h = t_next - t;
        if h <= 0.0 {
            continue;
        }
        let mut min_den = f64::INFINITY;
        for k in 0..n {
            tmp[k] = y[k] + 0.5 * h * k1[k];
        }
        min_den = min_den.min(field.rhs(t + 0.5 * h, &tmp, &mut k2, &mut ws));
        for k in 0..n {
            tmp[k] = y[k] + 0.5 * h * k2[k];
        }
        min_den = min_den.min(field.rhs(t + 0.5 * h, &tmp, &mut k3, &mut ws));
        for k in 0..n {
            tmp[k] = y[k] + h * k3[k];
        }
        min_den = min_den.min(field.rhs(t + h, &tmp, &mut k4, &mut ws));
        for k in 0..n {
            y[k] += h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
        }
        t = t_next;
        min_den = min_den.min(field.rhs(t, &y, &mut k1, &mut ws));
        if min_den < opts.guards.denominator || y.iter().any(|v| !v.is_finite()) {
            traj.aborted = Some(if min_den < opts.guards.denominator {
                guard_message(t, min_den)
            } else {
                format!("state left the finite range at t = {t}")
            });
            break;
        }
        traj.samples.push(Sample { t, state: y.clone() });
        derivs.push(k1.clone());
    }
    traj.dense = Dense::Hermite(derivs);
    Ok(traj)
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn dopri5(
    field: &CompiledField,
    y0: &[f64],
    span: (f64, f64),
    atol: f64,
    rtol: f64,
    opts: &Options,
) -> Result<Trajectory> {
    if !(atol > 0.0 && rtol >= 0.0) {
        return Err(Error::InvalidArgument("tolerances must be positive".into()));
    }
    let n = field.dim();
    let mut ws = field.workspace();
    let mut traj = empty_trajectory(opts.method, Dense::Dopri(Vec::new()));
    let mut segs: Vec<[Vec<f64>; 5]> = Vec::new();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut t = span.0;
    let mut y = y0.to_vec();
    let d0 = field.rhs(t, &y, &mut k[0], &mut ws);
    traj.samples.push(Sample { t, state: y.clone() });
    if d0 < opts.guards.denominator {
        traj.aborted = Some(guard_message(t, d0));
        traj.dense = Dense::Dopri(segs);
        return Ok(traj);
    }
    let total = span.1 - span.0;
    if total == 0.0 {
        traj.dense = Dense::Dopri(segs);
        return Ok(traj);
    }
    let norm = |v: &[f64], scale: &[f64]| -> f64 {
        (v.iter().zip(scale).map(|(a, s)| (a / s) * (a / s)).sum::<f64>() / n.max(1) as f64).sqrt()
    };
    // starting step from the size of the field
    let sc: Vec<f64> = y.iter().map(|v| atol + rtol * v.abs()).collect();
    let (dn0, dn1) = (norm(&y, &sc), norm(&k[0], &sc));
    let mut h = if dn0 < 1e-5 || dn1 < 1e-5 { 1e-6 } else { 0.01 * dn0 / dn1 };
    h = h.min(total).max(1e-12 * total);
    let mut steps = 0usize;
    let mut fac_old: f64 = 1e-4;
    while t < span.1 {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::InvalidArgument(format!("step limit {} reached at t = {t}", opts.max_steps)));
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { t });
        }
        let last = t + h >= span.1;
        if last {
            h = span.1 - t;
        }
        let mut min_den = f64::INFINITY;
        let stages: [(f64, &[f64]); 5] = [
            (C2, &[A21]),
            (C3, &[A31, A32]),
            (C4, &[A41, A42, A43]),
            (C5, &[A51, A52, A53, A54]),
            (1.0, &[A61, A62, A63, A64, A65]),
        ];
        for (s, (c, a)) in stages.iter().enumerate() {
            for j in 0..n {
                let mut acc = y[j];
                for (m, am) in a.iter().enumerate() {
                    acc += h * am * k[m][j];
                }
                ytmp[j] = acc;
            }
            min_den = min_den.min(field.rhs(t + c * h, &ytmp, &mut k[s + 1], &mut ws));
        }
        for j in 0..n {
            ynew[j] = y[j] + h * (A71 * k[0][j] + A73 * k[2][j] + A74 * k[3][j] + A75 * k[4][j] + A76 * k[5][j]);
        }
        let t_new = if last { span.1 } else { t + h };
        min_den = min_den.min(field.rhs(t_new, &ynew, &mut k[6], &mut ws));
        if min_den < opts.guards.denominator || ynew.iter().any(|v| !v.is_finite()) {
            // retry with a smaller step before concluding the path is singular
            if h > 1e-10 * total && (min_den.is_nan() || min_den >= opts.guards.denominator) {
                h *= 0.25;
                traj.rejected_steps += 1;
                continue;
            }
            traj.aborted = Some(if min_den < opts.guards.denominator {
                guard_message(t, min_den)
            } else {
                format!("state left the finite range at t = {t}")
            });
            break;
        }
        let mut err_sq = 0.0;
        for j in 0..n {
            let e = h * (E1 * k[0][j] + E3 * k[2][j] + E4 * k[3][j] + E5 * k[4][j] + E6 * k[5][j] + E7 * k[6][j]);
            let s = atol + rtol * y[j].abs().max(ynew[j].abs());
            err_sq += (e / s) * (e / s);
        }
        let err = (err_sq / n.max(1) as f64).sqrt();
        if err <= 1.0 {
            // Lund-stabilized controller
            let fac = (0.9 * err.max(1e-10).powf(-0.17) * fac_old.powf(0.04)).clamp(0.2, 10.0);
            fac_old = err.max(1e-4);
            let mut r: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; n]);
            for j in 0..n {
                let dy = ynew[j] - y[j];
                let bspl = h * k[0][j] - dy;
                r[0][j] = y[j];
                r[1][j] = dy;
                r[2][j] = bspl;
                r[3][j] = dy - h * k[6][j] - bspl;
                r[4][j] = h * (D1 * k[0][j] + D3 * k[2][j] + D4 * k[3][j] + D5 * k[4][j] + D6 * k[5][j] + D7 * k[6][j]);
            }
            segs.push(r);
            t = t_new;
            y.copy_from_slice(&ynew);
            k.swap(0, 6);
            traj.samples.push(Sample { t, state: y.clone() });
            h *= fac;
        } else {
            traj.rejected_steps += 1;
            h *= (0.9 * err.powf(-0.2)).max(0.2);
        }
    }
    traj.dense = Dense::Dopri(segs);
    Ok(traj)
}

/// Integrates the Hamiltonian flow of `time` and records first integrals
/// and divisor values at every sample.
pub fn integrate(
    sys: &HamiltonianSystem,
    time: Sym,
    initial: &[f64],
    params: &ParameterValues,
    span: (f64, f64),
    opts: &Options,
) -> Result<Trajectory> {
    if params.system != sys.id {
        return Err(Error::InvalidArgument("parameter values belong to another system".into()));
    }
    sys.relation.check(|s| params.get(s))?;
    let field = CompiledField::hamiltonian(sys, time, params)?;
    let mut traj = integrate_field(&field, initial, span, opts)?;
    traj.system = Some(sys.id);
    traj.time = sys.table.name(time).to_string();
    traj.state_names = sys.dynamical().iter().map(|&s| sys.table.name(s).to_string()).collect();
    traj.params = params.values().iter().map(|(s, v)| (sys.table.name(*s).to_string(), format_rational(v))).collect();
    attach_diagnostics(sys, time, params, &mut traj)?;
    Ok(traj)
}

fn attach_diagnostics(
    sys: &HamiltonianSystem,
    time: Sym,
    params: &ParameterValues,
    traj: &mut Trajectory,
) -> Result<()> {
    let bind = params.values().to_vec();
    let mut names = Vec::new();
    let mut exprs = Vec::new();
    let single = sys.hamiltonians.len() == 1;
    for (t, h) in &sys.hamiltonians {
        names.push(if single { "H".to_string() } else { format!("K{}", &sys.table.name(*t)[1..]) });
        exprs.push(RationalExpr::from_poly(h.evaluate_partial(&bind)));
    }
    for d in &sys.divisors {
        names.push(d.name.clone());
        exprs.push(RationalExpr::from_poly(d.poly.evaluate_partial(&bind)));
    }
    let mut inputs = sys.dynamical();
    inputs.push(time);
    // PDE Hamiltonians carry no explicit times, so one time input suffices
    let ev = Evaluator::new(&exprs, &inputs)?;
    let mut x = vec![0.0; inputs.len()];
    let mut pows = ev.scratch();
    let mut rows = Vec::with_capacity(traj.samples.len());
    for s in &traj.samples {
        x[..s.state.len()].copy_from_slice(&s.state);
        x[s.state.len()] = s.t;
        let mut out = vec![0.0; ev.outputs()];
        ev.eval_with(&x, &mut out, &mut pows);
        rows.push(out);
    }
    traj.diagnostic_names = names;
    traj.diagnostics = rows;
    Ok(())
}

/// Largest relative change of a diagnostic column from its initial value;
/// absolute when the initial value is zero.
pub fn relative_drift(traj: &Trajectory, name: &str) -> Option<f64> {
    let col = traj.diagnostic(name)?;
    let v0 = *col.first()?;
    let scale = if v0 == 0.0 { 1.0 } else { v0.abs() };
    Some(col.iter().map(|v| (v - v0).abs() / scale).fold(0.0, f64::max))
}
