use painleve_core::catalog::{build_system, k3_uncorrected, SystemId};
use painleve_core::flows::{
    divisor_invariance, field_from_bracket, field_from_hamiltonian, hamiltonian_vector_field, lie_bracket,
    reduction_map, scalar_reduction_identity, derived_components,
};
use painleve_core::symkernel::{parse_expr, RationalExpr, Substitution};
use painleve_core::{Exec, HamiltonianSystem};

fn expr(sys: &HamiltonianSystem, s: &str) -> RationalExpr {
    parse_expr(&sys.table, s).unwrap()
}

#[test]
fn field_components_from_partials() {
    let sys = build_system(SystemId::A4_2).unwrap();
    let f = hamiltonian_vector_field(&sys, sys.sym("t")).unwrap();
    assert_eq!(f.component(sys.sym("x")).unwrap(), &expr(&sys, "4*x*y - 2*a1 + 2*z*w"));
    assert_eq!(f.component(sys.sym("z")).unwrap(), &expr(&sys, "z^2 - w + x + 2*y*z"));

    let sys = build_system(SystemId::PdeA1_1).unwrap();
    let f = hamiltonian_vector_field(&sys, sys.sym("t1")).unwrap();
    assert_eq!(f.component(sys.sym("q2")).unwrap(), &expr(&sys, "-1/2*p2 + p1*q2"));
}

#[test]
fn partials_and_bracket_constructions_agree() {
    for id in SystemId::ALL {
        let sys = build_system(id).unwrap();
        for (t, h) in &sys.hamiltonians {
            let a = field_from_hamiltonian(&sys.structure, *t, h).unwrap();
            let b = field_from_bracket(&sys.structure, *t, h).unwrap();
            assert_eq!(a, b, "{id}");
        }
    }
}

#[test]
fn pde_flows_commute() {
    let sys = build_system(SystemId::PdeA1_1).unwrap();
    let fields: Vec<_> = sys.times().into_iter().map(|t| hamiltonian_vector_field(&sys, t).unwrap()).collect();
    for i in 0..3 {
        for j in i..3 {
            let br = lie_bracket(&fields[i], &fields[j]).unwrap().reduced(&sys.relation).unwrap();
            assert!(br.is_zero(), "[X{}, X{}]", i + 1, j + 1);
        }
    }
}

#[test]
fn uncorrected_k3_breaks_commutation() {
    let sys = build_system(SystemId::PdeA1_1).unwrap();
    let f1 = hamiltonian_vector_field(&sys, sys.sym("t1")).unwrap();
    let f3 = field_from_hamiltonian(&sys.structure, sys.sym("t3"), &k3_uncorrected(&sys).unwrap()).unwrap();
    assert!(!lie_bracket(&f1, &f3).unwrap().reduced(&sys.relation).unwrap().is_zero());
}

#[test]
fn pde_hamiltonians_are_first_integrals_of_every_flow() {
    let sys = build_system(SystemId::PdeA1_1).unwrap();
    for (_, k) in &sys.hamiltonians {
        for t in sys.times() {
            let f = hamiltonian_vector_field(&sys, t).unwrap();
            let d = f.derivative_of(&RationalExpr::from_poly(k.clone())).unwrap();
            assert!(sys.relation.reduce(&d).unwrap().is_zero());
        }
    }
}

#[test]
fn nonautonomous_hamiltonian_changes_by_explicit_time_derivative() {
    for (id, want) in [(SystemId::A4_2, "2*x"), (SystemId::A1_1, "x")] {
        let sys = build_system(id).unwrap();
        let t = sys.sym("t");
        let f = hamiltonian_vector_field(&sys, t).unwrap();
        let h = RationalExpr::from_poly(sys.hamiltonian(t).unwrap().clone());
        assert_eq!(f.derivative_of(&h).unwrap(), expr(&sys, want), "{id}");
    }
}

#[test]
fn divisor_cofactors() {
    let sys = build_system(SystemId::A4_2).unwrap();
    let t = sys.sym("t");
    let r = divisor_invariance(&sys, t, 1).unwrap();
    assert!(r.remainder_zero);
    assert_eq!(r.cofactor.as_deref(), Some(sys.poly("4*y + 2*z").to_string().as_str()));
    assert_eq!(r.parameter_coefficient.as_deref(), Some("-2"));
    let r = divisor_invariance(&sys, t, 0).unwrap();
    assert_eq!(r.cofactor.as_deref(), Some(sys.poly("-2*y - 2*z").to_string().as_str()));
    assert_eq!(r.parameter_coefficient.as_deref(), Some("-1"));
    let r = divisor_invariance(&sys, t, 2).unwrap();
    assert_eq!(r.cofactor.as_deref(), Some(sys.poly("-4*y").to_string().as_str()));
    assert_eq!(r.parameter_coefficient.as_deref(), Some("2"));

    let sys = build_system(SystemId::A1_1).unwrap();
    let r = divisor_invariance(&sys, sys.sym("t"), 0).unwrap();
    assert_eq!(r.cofactor.as_deref(), Some(sys.poly("2*y").to_string().as_str()));
    assert_eq!(r.parameter_coefficient.as_deref(), Some("-1"));
}

#[test]
fn every_divisor_is_invariant_for_every_time() {
    for id in SystemId::ALL {
        let sys = build_system(id).unwrap();
        for t in sys.times() {
            for i in 0..sys.divisors.len() {
                let r = divisor_invariance(&sys, t, i).unwrap();
                assert!(r.remainder_zero, "{id} f{i} {}", sys.table.name(t));
            }
        }
    }
}

#[test]
fn reduction_map_inverse_is_solved_and_consistent() {
    let sys = build_system(SystemId::PdeA1_1).unwrap();
    let ch = reduction_map(&sys).unwrap();
    let get = |n: &str| ch.inverse.iter().find(|(s, _)| *s == sys.sym(n)).unwrap().1.clone();
    assert!(get("q1").equals(&expr(&sys, "1/8 - x/(2*z)")).unwrap());
    assert!(get("q2").equals(&expr(&sys, "z")).unwrap());
    // forward after inverse recovers the new coordinates
    let sub = Substitution::new(&sys.table, &ch.inverse).unwrap();
    for (n, g) in &ch.forward {
        assert!(sub.apply(g).unwrap().equals(&RationalExpr::var(&sys.table, *n)).unwrap());
    }
    // and inverse after forward recovers the old ones
    let fwd = Substitution::new(&sys.table, &ch.forward).unwrap();
    for (o, e) in &ch.inverse {
        assert!(fwd.apply(e).unwrap().equals(&RationalExpr::var(&sys.table, *o)).unwrap());
    }
}

#[test]
fn scalar_equation_reproduces_pushforward() {
    let sys = build_system(SystemId::PdeA1_1).unwrap();
    let rep = scalar_reduction_identity(&sys, Exec::default()).unwrap();
    for e in &rep.entries {
        assert!(e.pass, "{}: {}", e.name, e.detail);
    }
    assert_eq!(rep.entries.len(), 7);
    assert!(rep.get("scalar t2").unwrap().detail.contains('/'));
}

#[test]
fn reduction_is_mode_independent() {
    let sys = build_system(SystemId::PdeA1_1).unwrap();
    let a = scalar_reduction_identity(&sys, Exec::Sequential).unwrap();
    let b = scalar_reduction_identity(&sys, Exec::Parallel).unwrap();
    assert_eq!(serde_json::to_value(&a).unwrap(), serde_json::to_value(&b).unwrap());
}

#[test]
fn derived_components_are_reported() {
    let sys = build_system(SystemId::PdeA1_1).unwrap();
    let comps = derived_components(&sys, Exec::default()).unwrap();
    assert_eq!(comps.len(), 6);
    assert_eq!(comps.iter().map(|c| c.name.as_str()).collect::<Vec<_>>(), ["f1", "f2", "f3", "f4", "f5", "f6"]);
}
