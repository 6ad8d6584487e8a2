use painleve_core::catalog::{build_system, ParameterValues, SystemId};
use painleve_core::flows::reduction_map;
use painleve_core::numerics::{
    backlund_solution_check, scalar_residual_check, format_f64, integrate, parse_f64, path_commutation_check, read_csv,
    read_json, relative_drift, to_csv, to_json, Evaluator, FloatFormat, Guards, Method, Options, ScalarResidualProbe,
    Table,
};
use painleve_core::symkernel::{parse_expr, q, to_f64, Rational};
use painleve_core::weyl::generator;
use painleve_core::{Error, HamiltonianSystem};
use proptest::prelude::*;

fn pde() -> (HamiltonianSystem, ParameterValues) {
    let sys = build_system(SystemId::PdeA1_1).unwrap();
    let pv = ParameterValues::new(&sys, &[q(1, 2), q(-1, 2)]).unwrap();
    (sys, pv)
}

fn rk4(step: f64) -> Options {
    Options::new(Method::Rk4 { step })
}

fn rk45(tol: f64) -> Options {
    Options::new(Method::Rk45 { atol: tol, rtol: tol })
}

const KS: [&str; 3] = ["K1", "K2", "K3"];

#[test]
fn first_integrals_drift_below_threshold_on_t1() {
    let (sys, pv) = pde();
    let tr = integrate(&sys, sys.sym("t1"), &[1.0; 4], &pv, (0.0, 1.0), &rk4(1e-3)).unwrap();
    assert!(tr.aborted.is_none());
    assert_eq!(tr.diagnostic_names, ["K1", "K2", "K3", "f0", "f1"]);
    for k in KS {
        let d = relative_drift(&tr, k).unwrap();
        assert!(d <= 1e-6, "{k}: {d:e}");
    }
}

#[test]
fn first_integrals_are_conserved_by_every_flow() {
    // the t3 flow from this state reaches a pole near 0.56, so it gets a shorter span
    let (sys, pv) = pde();
    for (t, end) in [("t1", 1.0), ("t2", 1.0), ("t3", 0.25)] {
        let tr = integrate(&sys, sys.sym(t), &[1.0; 4], &pv, (0.0, end), &rk4(1e-3)).unwrap();
        assert!(tr.aborted.is_none(), "{t}");
        for k in KS {
            assert!(relative_drift(&tr, k).unwrap() <= 1e-6, "{k} along {t}");
        }
    }
}

#[test]
fn rk4_drift_converges_at_fourth_order() {
    let (sys, pv) = pde();
    for t in ["t1", "t2"] {
        let drift = |step: f64| {
            let tr = integrate(&sys, sys.sym(t), &[1.0; 4], &pv, (0.0, 1.0), &rk4(step)).unwrap();
            KS.map(|k| relative_drift(&tr, k).unwrap())
        };
        let d = [drift(0.05), drift(0.025), drift(0.0125)];
        for m in 0..3 {
            assert!(d[0][m] / d[1][m] >= 8.0, "{t} {}: {:?}", KS[m], d);
            assert!(d[1][m] / d[2][m] >= 8.0, "{t} {}: {:?}", KS[m], d);
        }
    }
}

#[test]
fn origin_is_a_fixed_point_when_a0_vanishes() {
    let sys = build_system(SystemId::PdeA1_1).unwrap();
    let pv = ParameterValues::new(&sys, &[q(0, 1), q(0, 1)]).unwrap();
    for t in sys.times() {
        let tr = integrate(&sys, t, &[0.0; 4], &pv, (0.0, 1.0), &rk4(0.1)).unwrap();
        assert!(tr.samples.iter().all(|s| s.state == [0.0; 4]));
    }
}

#[test]
fn hamiltonian_changes_by_integral_of_explicit_time_derivative() {
    // this solution has a pole near t = 0.5145, so the quadrature stops short of it
    let sys = build_system(SystemId::A4_2).unwrap();
    let pv = ParameterValues::new(&sys, &[q(1, 1), q(0, 1), q(0, 1)]).unwrap();
    let tr = integrate(&sys, sys.sym("t"), &[1.0, 0.0, 1.0, 1.0], &pv, (0.0, 0.45), &rk4(1e-3)).unwrap();
    assert!(tr.aborted.is_none());
    let h = tr.diagnostic("H").unwrap();
    let mut integral = 0.0;
    for w in tr.samples.windows(2) {
        integral += 0.5 * (w[1].t - w[0].t) * (2.0 * w[0].state[0] + 2.0 * w[1].state[0]);
    }
    let change = h.last().unwrap() - h[0];
    assert!((change - integral).abs() <= 1e-5, "{change} vs {integral}");
}

#[test]
fn pole_on_the_unit_interval_is_detected() {
    let sys = build_system(SystemId::A4_2).unwrap();
    let pv = ParameterValues::new(&sys, &[q(1, 1), q(0, 1), q(0, 1)]).unwrap();
    let tr = integrate(&sys, sys.sym("t"), &[1.0, 0.0, 1.0, 1.0], &pv, (0.0, 1.0), &rk4(1e-3)).unwrap();
    let end = tr.end();
    assert!(tr.aborted.is_some() && end > 0.5 && end < 0.52, "{end}");
    match integrate(&sys, sys.sym("t"), &[1.0, 0.0, 1.0, 1.0], &pv, (0.0, 1.0), &rk45(1e-12)) {
        Err(Error::StepUnderflow { t }) => assert!((t - 0.5145).abs() < 1e-3, "{t}"),
        other => panic!("expected step underflow, got {other:?}"),
    }
}

#[test]
fn divisor_columns_are_reported() {
    let sys = build_system(SystemId::A4_2).unwrap();
    let pv = ParameterValues::new(&sys, &[q(1, 3), q(1, 5), q(2, 15)]).unwrap();
    let tr = integrate(&sys, sys.sym("t"), &[1.0, 0.0, 1.0, 1.0], &pv, (0.0, 0.1), &rk4(0.01)).unwrap();
    assert_eq!(tr.diagnostic_names, ["H", "f0", "f1", "f2"]);
    // f1 = x + z^2 and f2 = x + y^2 + w + t at the start
    assert_eq!(tr.diagnostics[0][2], 2.0);
    assert_eq!(tr.diagnostics[0][3], 2.0);
}

#[test]
fn zero_span_gives_a_single_sample() {
    let (sys, pv) = pde();
    for opts in [rk4(0.1), rk45(1e-10)] {
        let tr = integrate(&sys, sys.sym("t1"), &[1.0; 4], &pv, (0.3, 0.3), &opts).unwrap();
        assert_eq!(tr.samples.len(), 1);
        assert_eq!(tr.interpolate(0.3).unwrap(), vec![1.0; 4]);
    }
}

#[test]
fn invalid_inputs_are_rejected() {
    let (sys, pv) = pde();
    let t1 = sys.sym("t1");
    assert!(integrate(&sys, t1, &[1.0; 3], &pv, (0.0, 1.0), &rk4(0.1)).is_err());
    assert!(integrate(&sys, t1, &[f64::NAN, 1.0, 1.0, 1.0], &pv, (0.0, 1.0), &rk4(0.1)).is_err());
    assert!(integrate(&sys, t1, &[1.0; 4], &pv, (1.0, 0.0), &rk4(0.1)).is_err());
    assert!(integrate(&sys, t1, &[1.0; 4], &pv, (0.0, 1.0), &rk4(0.0)).is_err());
    let other = build_system(SystemId::A1_1).unwrap();
    let foreign = ParameterValues::new(&other, &[q(1, 3), q(2, 3)]).unwrap();
    assert!(integrate(&sys, t1, &[1.0; 4], &foreign, (0.0, 1.0), &rk4(0.1)).is_err());
}

#[test]
fn blow_up_is_flagged_or_reported_as_underflow() {
    let (sys, pv) = pde();
    let t3 = sys.sym("t3");
    let tr = integrate(&sys, t3, &[1.0; 4], &pv, (0.0, 1.0), &rk4(1e-3)).unwrap();
    assert!(tr.aborted.is_some());
    assert!(tr.end() < 1.0);
    match integrate(&sys, t3, &[1.0; 4], &pv, (0.0, 1.0), &rk45(1e-10)) {
        // the adaptive run may step across the first pole and stop at a later one
        Err(Error::StepUnderflow { t }) => assert!(t > 0.5 && t < 1.0, "{t}"),
        Ok(tr) => assert!(tr.aborted.is_some() && tr.end() < 1.0),
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn adaptive_and_fixed_step_agree() {
    let (sys, pv) = pde();
    let a = integrate(&sys, sys.sym("t2"), &[1.0; 4], &pv, (0.0, 1.0), &rk4(1e-3)).unwrap();
    let b = integrate(&sys, sys.sym("t2"), &[1.0; 4], &pv, (0.0, 1.0), &rk45(1e-12)).unwrap();
    assert!(b.rejected_steps < b.samples.len());
    for (x, y) in a.last_state().iter().zip(b.last_state()) {
        assert!((x - y).abs() < 1e-10);
    }
}

#[test]
fn dense_output_matches_direct_integration() {
    let (sys, pv) = pde();
    let t1 = sys.sym("t1");
    for (opts, tol) in [(rk45(1e-12), 1e-9), (rk4(1e-3), 1e-9)] {
        let full = integrate(&sys, t1, &[1.0; 4], &pv, (0.0, 1.0), &opts).unwrap();
        let direct = integrate(&sys, t1, &[1.0; 4], &pv, (0.0, 0.3137), &rk45(1e-13)).unwrap();
        let got = full.interpolate(0.3137).unwrap();
        for (x, y) in got.iter().zip(direct.last_state()) {
            assert!((x - y).abs() < tol, "{:?}: {x} vs {y}", opts.method);
        }
        assert!(full.interpolate(1.5).is_none());
    }
}

#[test]
fn samples_are_strictly_increasing() {
    let (sys, pv) = pde();
    for opts in [rk4(0.03), rk45(1e-9)] {
        let tr = integrate(&sys, sys.sym("t1"), &[1.0; 4], &pv, (0.0, 1.0), &opts).unwrap();
        assert!(tr.samples.windows(2).all(|w| w[0].t < w[1].t));
        assert_eq!(tr.end(), 1.0);
        assert!(tr.samples.iter().all(|s| s.state.len() == 4));
    }
}

#[test]
fn flows_commute_numerically() {
    let (sys, pv) = pde();
    for order in [(1, 2), (1, 3), (2, 3)] {
        let d = path_commutation_check(&sys, &[1.0; 4], &pv, 0.1, order, 1e-12, Guards::default()).unwrap();
        assert!(d <= 1e-7, "{order:?}: {d:e}");
    }
    for i in 1..=3 {
        let d = path_commutation_check(&sys, &[1.0; 4], &pv, 0.1, (i, i), 1e-12, Guards::default()).unwrap();
        assert_eq!(d, 0.0);
    }
    assert!(path_commutation_check(&sys, &[1.0; 4], &pv, 0.1, (0, 4), 1e-12, Guards::default()).is_err());
    let a4 = build_system(SystemId::A4_2).unwrap();
    let pa = ParameterValues::new(&a4, &[q(1, 3), q(1, 5), q(2, 15)]).unwrap();
    assert!(path_commutation_check(&a4, &[1.0; 4], &pa, 0.1, (1, 1), 1e-12, Guards::default()).is_err());
}

fn backlund_errors(id: SystemId, g: &str, init: &[f64], alpha: &[Rational]) -> Vec<f64> {
    let sys = build_system(id).unwrap();
    let pv = ParameterValues::new(&sys, alpha).unwrap();
    let m = generator(&sys, g).unwrap();
    let t = sys.times()[0];
    [1e-8, 1e-10, 1e-12]
        .iter()
        .map(|&tol| {
            let r = backlund_solution_check(&sys, &m, t, init, &pv, (0.0, 0.5), &rk45(tol)).unwrap();
            assert!(r.guarded.is_none(), "{id} {g}: {:?}", r.guarded);
            assert!(r.compared > 1);
            r.sup_error
        })
        .collect()
}

#[test]
fn backlund_transport_for_each_system() {
    let cases: [(SystemId, &str, Vec<f64>, Vec<Rational>); 4] = [
        (SystemId::A4_2, "s2", vec![1.0, 0.0, 1.0, 1.0], vec![q(1, 3), q(1, 5), q(2, 15)]),
        (SystemId::A1_1, "s1", vec![1.0, 0.0, 1.0, 1.0], vec![q(1, 3), q(2, 3)]),
        (SystemId::PdeA1_1, "s0", vec![1.0; 4], vec![q(1, 2), q(-1, 2)]),
        (SystemId::PdeA1_1, "s1", vec![1.0; 4], vec![q(1, 2), q(-1, 2)]),
    ];
    for (id, g, init, alpha) in cases {
        let e = backlund_errors(id, g, &init, &alpha);
        assert!(e[2] <= 1e-6, "{id} {g}: {e:?}");
        assert!(e[0] > e[1] && e[1] > e[2], "{id} {g} not monotone: {e:?}");
    }
}

#[test]
fn backlund_with_vanishing_parameter_is_identity() {
    let sys = build_system(SystemId::A4_2).unwrap();
    let pv = ParameterValues::new(&sys, &[q(0, 1), q(1, 4), q(1, 4)]).unwrap();
    let m = generator(&sys, "s0").unwrap();
    let r =
        backlund_solution_check(&sys, &m, sys.sym("t"), &[1.0, 0.0, 1.0, 1.0], &pv, (0.0, 0.5), &rk45(1e-10)).unwrap();
    assert_eq!(r.sup_error, 0.0);
    assert_eq!(r.image_params, ["0", "1/4", "1/4"]);
}

#[test]
fn backlund_guard_on_divisor() {
    // s0 divides by w
    let sys = build_system(SystemId::A4_2).unwrap();
    let pv = ParameterValues::new(&sys, &[q(1, 3), q(1, 5), q(2, 15)]).unwrap();
    let m = generator(&sys, "s0").unwrap();
    let r = backlund_solution_check(&sys, &m, sys.sym("t"), &[1.0, 0.0, 1.0, 0.0], &pv, (0.0, 0.5), &rk45(1e-10));
    assert!(matches!(r, Err(Error::GuardTriggered(_))));
}

#[test]
fn scalar_equation_residuals_along_t1() {
    let (sys, pv) = pde();
    let tr = integrate(&sys, sys.sym("t1"), &[1.0; 4], &pv, (0.0, 0.5), &rk45(1e-12)).unwrap();
    let r = scalar_residual_check(&sys, &tr, &pv, Guards::default()).unwrap();
    assert_eq!(r.evaluated + r.skipped, tr.samples.len());
    for (k, m) in r.max.iter().enumerate() {
        assert!(*m <= 1e-6, "equation {k}: {m:e}");
    }
    assert!(r.second_two_ways <= 1e-10, "{:e}", r.second_two_ways);
}

#[test]
fn singular_locus_samples_are_skipped() {
    let (sys, pv) = pde();
    let probe = ScalarResidualProbe::new(&sys, &pv).unwrap();
    // old coordinates of (x, y, z, w) with x = (8 z^3 + z)/4
    let ch = reduction_map(&sys).unwrap();
    let bound: Vec<_> = ch.inverse.iter().map(|(_, e)| e.evaluate_partial(pv.values()).unwrap()).collect();
    let xyzw = [sys.sym("x"), sys.sym("y"), sys.sym("z"), sys.sym("w")];
    let inv = Evaluator::new(&bound, &xyzw).unwrap();
    let z = 0.7;
    let singular = inv.eval(&[(8.0 * z * z * z + z) / 4.0, 0.3, z, -0.2]).0;
    let regular = inv.eval(&[0.1, 0.3, z, -0.2]).0;
    let r = probe.residuals(&[singular.clone(), regular], Guards::default().residual_skip).unwrap();
    assert_eq!((r.evaluated, r.skipped), (1, 1));
    assert!(matches!(probe.residuals(&[singular], 1e-6), Err(Error::GuardTriggered(_))));
}

#[test]
fn residual_check_requires_t1_trajectory() {
    let (sys, pv) = pde();
    let tr = integrate(&sys, sys.sym("t2"), &[1.0; 4], &pv, (0.0, 0.1), &rk4(0.01)).unwrap();
    assert!(scalar_residual_check(&sys, &tr, &pv, Guards::default()).is_err());
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-10_000i64..=10_000, 1i64..=10_000).prop_map(|(n, d)| q(n, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn evaluator_matches_exact_evaluation(pt in proptest::collection::vec(small_rational(), 5)) {
        let sys = build_system(SystemId::A4_2).unwrap();
        let exprs = [
            "x + 2*a2*y/(x + y^2 + w + t) - a2^2/(x + y^2 + w + t)^2",
            "2*x*y^2 + 2*x^2 + 2*t*x - 2*a1*y + z^2*w - 1/2*w^2 + a0*z + x*w + 2*y*z*w",
            "z + a0/w",
        ];
        let pv = ParameterValues::new(&sys, &[q(1, 3), q(1, 5), q(2, 15)]).unwrap();
        let parsed: Vec<_> = exprs.iter().map(|s| parse_expr(&sys.table, s).unwrap().evaluate_partial(pv.values()).unwrap()).collect();
        let inputs = [sys.sym("x"), sys.sym("y"), sys.sym("z"), sys.sym("w"), sys.sym("t")];
        let ev = Evaluator::new(&parsed, &inputs).unwrap();
        let x: Vec<f64> = pt.iter().map(to_f64).collect();
        let (out, _) = ev.eval(&x);
        for (e, got) in parsed.iter().zip(out) {
            let look = |s| inputs.iter().position(|&i| i == s).map(|k| pt[k].clone());
            let Ok(exact) = e.evaluate(look) else { continue };
            let want = to_f64(&exact);
            prop_assert!((got - want).abs() <= 1e-13 * want.abs().max(1.0), "{got} vs {want}");
        }
    }

    #[test]
    fn floats_round_trip_bitwise(bits in any::<u64>()) {
        let v = f64::from_bits(bits);
        prop_assume!(!v.is_nan());
        for fmt in [FloatFormat::Shortest, FloatFormat::Hex] {
            let s = format_f64(v, fmt);
            prop_assert_eq!(parse_f64(&s).unwrap().to_bits(), bits, "{}", s);
        }
    }
}

#[test]
fn hex_encoding_examples() {
    assert_eq!(format_f64(3.0, FloatFormat::Hex), "0x1.8p+1");
    assert_eq!(format_f64(-0.0, FloatFormat::Hex), "-0x0p+0");
    assert_eq!(format_f64(f64::MIN_POSITIVE / 2.0, FloatFormat::Hex), "0x0.8p-1022");
    assert_eq!(parse_f64("0x1p-2").unwrap(), 0.25);
    assert!(parse_f64("0x2p+0").is_err());
    assert!(parse_f64("abc").is_err());
}

#[test]
fn trajectory_exports_round_trip() {
    let (sys, pv) = pde();
    let tr = integrate(&sys, sys.sym("t1"), &[1.0; 4], &pv, (0.0, 0.2), &rk45(1e-10)).unwrap();
    let table = Table::of(&tr);
    assert_eq!(table.columns, ["t1", "q1", "p1", "q2", "p2", "K1", "K2", "K3", "f0", "f1"]);
    for fmt in [FloatFormat::Shortest, FloatFormat::Hex] {
        let csv = to_csv(&tr, fmt);
        assert!(read_csv(&csv).unwrap().bit_equal(&table));
        let doc = to_json(&tr, fmt);
        assert_eq!(doc["metadata"]["system"], "PDE_A1_1");
        assert_eq!(doc["metadata"]["integrator"]["method"], "rk45");
        let text = serde_json::to_string(&doc).unwrap();
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(read_json(&back).unwrap().bit_equal(&table));
    }
}

#[test]
fn malformed_exports_are_rejected() {
    assert!(read_csv("").is_err());
    assert!(read_csv("t,x\n1.0\n").is_err());
    assert!(read_json(&serde_json::json!({"samples": []})).is_err());
}
