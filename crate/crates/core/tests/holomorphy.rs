use painleve_core::catalog::{build_system, ParameterValues, SystemId};
use painleve_core::holomorphy::{
    ansatz_solve, ansatz_solve_with_charts, chart, chart_inverse, charts, check_polynomiality, default_t_degree,
    invert_rules, transform_hamiltonian, Chart, Polynomiality,
};
use painleve_core::symkernel::{parse_expr, q, IdentityMode, Polynomial, RationalExpr, Substitution};
use painleve_core::{Error, Exec, HamiltonianSystem};

fn expr(sys: &HamiltonianSystem, s: &str) -> RationalExpr {
    parse_expr(&sys.table, s).unwrap()
}

fn inverse_of(sys: &HamiltonianSystem, c: &Chart, v: &str) -> RationalExpr {
    c.inverse.iter().find(|(s, _)| *s == sys.sym(v)).unwrap().1.clone()
}

fn hamiltonian(sys: &HamiltonianSystem) -> Polynomial {
    sys.hamiltonians[0].1.clone()
}

#[test]
fn r0_inverse_closed_form() {
    let sys = build_system(SystemId::A4_2).unwrap();
    let c = chart(&sys, "r0").unwrap();
    for (v, want) in [("x", "x0"), ("y", "y0"), ("z", "1/z0"), ("w", "-w0*z0^2 - a0*z0")] {
        assert!(inverse_of(&sys, &c, v).equals(&expr(&sys, want)).unwrap(), "{v}");
    }
}

#[test]
fn r1_inverse_closed_form() {
    let sys = build_system(SystemId::A4_2).unwrap();
    let c = chart(&sys, "r1").unwrap();
    for (v, want) in [("y", "1/y1"), ("z", "z1"), ("x", "-x1*y1^2 + a1*y1 - z1^2"), ("w", "w1 + 2*z1/y1")] {
        assert!(inverse_of(&sys, &c, v).equals(&expr(&sys, want)).unwrap(), "{v}");
    }
}

#[test]
fn identity_rules_invert_to_identity() {
    let sys = build_system(SystemId::A1_1).unwrap();
    let fwd: Vec<_> = sys.dynamical().into_iter().map(|v| (v, RationalExpr::var(&sys.table, v))).collect();
    let inv = invert_rules(&sys.table, &fwd, &sys.dynamical()).unwrap();
    assert_eq!(inv, fwd);
}

#[test]
fn nonlinear_rule_is_not_invertible() {
    let sys = build_system(SystemId::A1_1).unwrap();
    let t = &sys.table;
    let fwd = vec![
        (sys.sym("x0"), expr(&sys, "x^2")),
        (sys.sym("y0"), expr(&sys, "y")),
        (sys.sym("z0"), expr(&sys, "z")),
        (sys.sym("w0"), expr(&sys, "w")),
    ];
    assert!(matches!(invert_rules(t, &fwd, &sys.dynamical()), Err(Error::NotInvertible(_))));
}

#[test]
fn charts_compose_to_identity_both_ways() {
    for id in SystemId::ALL {
        let sys = build_system(id).unwrap();
        for c in charts(&sys).unwrap() {
            let inv = Substitution::new(&sys.table, &c.inverse).unwrap();
            let fwd = Substitution::new(&sys.table, &c.forward).unwrap();
            for (n, g) in &c.forward {
                let back = inv.apply(g).unwrap();
                let mode = IdentityMode::sampled(7);
                let target = RationalExpr::var(&sys.table, *n);
                assert!(painleve_core::symkernel::is_identically_equal(&back, &target, mode).unwrap());
            }
            for (o, e) in &c.inverse {
                assert!(fwd.apply(e).unwrap().equals(&RationalExpr::var(&sys.table, *o)).unwrap(), "{id} {}", c.name);
            }
        }
    }
}

#[test]
fn chart_inverse_repopulates_rules() {
    let sys = build_system(SystemId::A4_2).unwrap();
    let mut c = chart(&sys, "r2").unwrap();
    let expected = c.inverse.clone();
    c.inverse.clear();
    assert!(matches!(transform_hamiltonian(&c, &hamiltonian(&sys)), Err(Error::MissingInverse)));
    let c = chart_inverse(&c, &sys.dynamical()).unwrap();
    assert_eq!(c.inverse, expected);
}

#[test]
fn listed_transforms_are_polynomial() {
    for id in SystemId::ALL {
        let sys = build_system(id).unwrap();
        for c in charts(&sys).unwrap() {
            for (t, k) in &sys.hamiltonians {
                let r = check_polynomiality(&c, k).unwrap();
                assert!(r.is_polynomial(), "{id} {} {}: {r:?}", c.name, sys.table.name(*t));
            }
        }
    }
}

#[test]
fn correction_is_needed_on_the_last_chart() {
    for (id, name) in [(SystemId::A4_2, "r2"), (SystemId::A1_1, "r1")] {
        let sys = build_system(id).unwrap();
        let mut c = chart(&sys, name).unwrap();
        c.correction = Polynomial::zero(&sys.table);
        assert!(!check_polynomiality(&c, &hamiltonian(&sys)).unwrap().is_polynomial(), "{id}");
    }
}

#[test]
fn perturbation_yields_witness() {
    let cases = [(SystemId::A4_2, "r2"), (SystemId::A1_1, "r1")];
    for (id, name) in cases {
        let sys = build_system(id).unwrap();
        let c = chart(&sys, name).unwrap();
        let k = hamiltonian(&sys) + sys.poly("x");
        match check_polynomiality(&c, &k).unwrap() {
            Polynomiality::Witness(w) => assert!(!w.residual_terms.is_empty(), "{id} {name}"),
            Polynomiality::Polynomial(_) => panic!("{id} {name} unexpectedly polynomial"),
        }
    }
    let sys = build_system(SystemId::PdeA1_1).unwrap();
    let c = chart(&sys, "R1").unwrap();
    let k = sys.hamiltonians[0].1.clone() + sys.poly("q1");
    assert!(!check_polynomiality(&c, &k).unwrap().is_polynomial());
}

#[test]
fn linear_perturbation_survives_charts_where_x_is_polynomial() {
    // x pulls back to a polynomial under r0 and r1, so H + x stays polynomial there
    let sys = build_system(SystemId::A4_2).unwrap();
    let k = hamiltonian(&sys) + sys.poly("x");
    for name in ["r0", "r1"] {
        assert!(check_polynomiality(&chart(&sys, name).unwrap(), &k).unwrap().is_polynomial(), "{name}");
    }
}

#[test]
fn constant_transforms_to_itself() {
    let sys = build_system(SystemId::A4_2).unwrap();
    let c = chart(&sys, "r0").unwrap();
    let one = Polynomial::one(&sys.table);
    assert_eq!(transform_hamiltonian(&c, &one).unwrap(), RationalExpr::one(&sys.table));
}

fn samples(id: SystemId) -> [Vec<painleve_core::symkernel::Rational>; 2] {
    match id {
        SystemId::A4_2 => [vec![q(1, 3), q(1, 5), q(2, 15)], vec![q(1, 7), q(2, 9), q(13, 63)]],
        SystemId::A1_1 => [vec![q(1, 3), q(2, 3)], vec![q(2, 7), q(5, 7)]],
        SystemId::PdeA1_1 => [vec![q(1, 2), q(-1, 2)], vec![q(3, 7), q(-3, 7)]],
    }
}

#[test]
fn ansatz_contains_catalog_hamiltonians_and_is_stable() {
    for id in SystemId::ALL {
        let sys = build_system(id).unwrap();
        let [a, b] = samples(id);
        let pa = ParameterValues::new(&sys, &a).unwrap();
        let pb = ParameterValues::new(&sys, &b).unwrap();
        let ra = ansatz_solve(&sys, default_t_degree(id), &pa, Exec::default()).unwrap();
        let rb = ansatz_solve(&sys, default_t_degree(id), &pb, Exec::default()).unwrap();
        assert!(ra.all_members(), "{id}: {:?}", ra.membership);
        assert!(rb.all_members(), "{id}: {:?}", rb.membership);
        assert_eq!(ra.nullspace_dim, rb.nullspace_dim, "{id}");
        assert_eq!(ra.nullspace_dim + ra.rank, ra.columns);
        assert_eq!(ra.basis.len(), ra.nullspace_dim);
    }
}

#[test]
fn dropping_a_chart_enlarges_the_solution_space() {
    for id in SystemId::ALL {
        let sys = build_system(id).unwrap();
        let pv = ParameterValues::new(&sys, &samples(id)[0]).unwrap();
        let all = charts(&sys).unwrap();
        let full = ansatz_solve_with_charts(&sys, default_t_degree(id), &pv, &all, Exec::default()).unwrap();
        for skip in 0..all.len() {
            let fewer: Vec<Chart> =
                all.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, c)| c.clone()).collect();
            let r = ansatz_solve_with_charts(&sys, default_t_degree(id), &pv, &fewer, Exec::default()).unwrap();
            assert!(r.nullspace_dim > full.nullspace_dim, "{id} without {}", all[skip].name);
        }
    }
}

#[test]
fn ansatz_is_mode_independent() {
    let sys = build_system(SystemId::A1_1).unwrap();
    let pv = ParameterValues::new(&sys, &samples(SystemId::A1_1)[0]).unwrap();
    let a = ansatz_solve(&sys, 2, &pv, Exec::Sequential).unwrap();
    let b = ansatz_solve(&sys, 2, &pv, Exec::Parallel).unwrap();
    assert_eq!(serde_json::to_value(&a).unwrap(), serde_json::to_value(&b).unwrap());
}

#[test]
fn ansatz_rejects_foreign_or_invalid_samples() {
    let a4 = build_system(SystemId::A4_2).unwrap();
    let a1 = build_system(SystemId::A1_1).unwrap();
    let pv = ParameterValues::new(&a1, &[q(1, 3), q(2, 3)]).unwrap();
    assert!(ansatz_solve(&a4, 2, &pv, Exec::Sequential).is_err());
}
