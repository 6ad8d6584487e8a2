use std::sync::Arc;

use painleve_core::symkernel::*;
use painleve_core::Error;
use proptest::prelude::*;

fn tbl() -> Arc<VarTable> {
    table(&[
        ("x", SymbolClass::Dynamical),
        ("y", SymbolClass::Dynamical),
        ("z", SymbolClass::Dynamical),
        ("w", SymbolClass::Dynamical),
        ("t", SymbolClass::Time),
        ("a0", SymbolClass::Parameter),
        ("a1", SymbolClass::Parameter),
        ("a2", SymbolClass::Parameter),
        ("z0", SymbolClass::Auxiliary),
        ("w0", SymbolClass::Auxiliary),
    ])
    .unwrap()
}

fn p(t: &Arc<VarTable>, s: &str) -> Polynomial {
    parse_poly(t, s).unwrap()
}

fn e(t: &Arc<VarTable>, s: &str) -> RationalExpr {
    parse_expr(t, s).unwrap()
}

#[test]
fn additive_inverse_and_difference_of_squares() {
    let t = tbl();
    assert!((p(&t, "x") + p(&t, "-x")).is_zero());
    assert_eq!(p(&t, "x+z") * p(&t, "x-z"), p(&t, "x^2-z^2"));
}

#[test]
fn square_by_repeated_multiplication() {
    let t = tbl();
    let b = p(&t, "x+y^2");
    assert_eq!(b.pow(2), p(&t, "x^2 + 2*x*y^2 + y^4"));
    assert_eq!(b.pow(2), &b * &b);
}

#[test]
fn mismatched_tables_are_rejected() {
    let t = tbl();
    let other = table(&[("x", SymbolClass::Dynamical)]).unwrap();
    let a = p(&t, "x");
    let b = parse_poly(&other, "x").unwrap();
    assert_eq!(a.checked_add(&b), Err(Error::TableMismatch));
}

#[test]
fn derivatives() {
    let t = tbl();
    let y = t.sym("y").unwrap();
    let f = e(&t, "2*x*y^2 + 2*x^2 + 2*t*x - 2*a1*y");
    assert!(f.differentiate(y).unwrap().equals(&e(&t, "4*x*y - 2*a1")).unwrap());
    let c = e(&t, "7/3");
    assert!(c.differentiate(t.sym("x").unwrap()).unwrap().is_zero());
    let w = t.sym("w").unwrap();
    let q = e(&t, "a0/w").differentiate(w).unwrap();
    assert!(q.equals(&e(&t, "-a0/w^2")).unwrap());
}

#[test]
fn substitution_examples() {
    let t = tbl();
    let w = t.sym("w").unwrap();
    let z = t.sym("z").unwrap();
    let r = substitute(&e(&t, "w"), &[(w, e(&t, "-w0*z0^2 - a0*z0"))]).unwrap();
    assert_eq!(r, e(&t, "-w0*z0^2-a0*z0"));
    let f = e(&t, "x+z^2");
    let id: Vec<(Sym, RationalExpr)> = ["x", "y", "z", "w"].iter().map(|n| (t.sym(n).unwrap(), e(&t, n))).collect();
    assert_eq!(substitute(&f, &id).unwrap(), f);
    let r = substitute(&f, &[(z, e(&t, "1/z0"))]).unwrap();
    assert!(r.equals(&e(&t, "(x*z0^2+1)/z0^2")).unwrap());
    assert_eq!(r.den(), &p(&t, "z0^2"));
}

#[test]
fn substitution_into_fraction_and_zero_denominator() {
    let t = tbl();
    let x = t.sym("x").unwrap();
    let z = t.sym("z").unwrap();
    let f = e(&t, "y/(x+z^2)");
    let r = substitute(&f, &[(x, e(&t, "-z^2"))]);
    assert_eq!(r, Err(Error::ZeroDenominator));
    let r = substitute(&f, &[(z, e(&t, "1/z0"))]).unwrap();
    assert!(r.equals(&e(&t, "y*z0^2/(x*z0^2+1)")).unwrap());
}

#[test]
fn exact_division_examples() {
    let t = tbl();
    assert_eq!(p(&t, "x^2-z^2").exact_divide(&p(&t, "x-z")).unwrap(), Some(p(&t, "x+z")));
    assert_eq!(p(&t, "x^2+1").exact_divide(&p(&t, "x")).unwrap(), None);
    let n = p(&t, "(4*y+2*z)*(x+z^2)");
    assert_eq!(n.exact_divide(&p(&t, "x+z^2")).unwrap(), Some(p(&t, "4*y+2*z")));
    assert_eq!(n.exact_divide(&Polynomial::zero(&t)), Err(Error::DivisionByZero));
}

#[test]
fn brackets() {
    let t = tbl();
    let s = CanonicalStructure::from_names(&t, &[("x", "y"), ("z", "w")]).unwrap();
    let b = poisson_bracket(&e(&t, "y"), &e(&t, "x"), &s).unwrap();
    assert_eq!(b, e(&t, "1"));
    let h = e(&t, "2*x*y^2 + z^2*w + t*x");
    assert!(poisson_bracket(&h, &h, &s).unwrap().is_zero());
    assert!(matches!(CanonicalStructure::from_names(&t, &[("x", "y")]), Err(Error::Unpaired(_))));
}

#[test]
fn identity_modes() {
    let t = tbl();
    let a = e(&t, "(x^2-z^2)/(x-z)");
    let b = e(&t, "x+z");
    assert!(is_identically_equal(&a, &b, IdentityMode::Symbolic).unwrap());
    assert!(is_identically_equal(&a, &b, IdentityMode::sampled(7)).unwrap());
    let c = e(&t, "x+a1");
    let x = e(&t, "x");
    assert!(!is_identically_equal(&x, &c, IdentityMode::Symbolic).unwrap());
    assert!(!is_identically_equal(&x, &c, IdentityMode::sampled(7)).unwrap());
}

#[test]
fn sampling_gives_up_on_identically_singular_points() {
    let t = tbl();
    // 1/(x - x) cannot be built, but a denominator vanishing on every sample can be
    // emulated with an impossible validity predicate.
    let mut sampler = PointSampler::new(1, vec![t.sym("x").unwrap()]);
    let r = sampler.points(3, |_| false);
    assert!(matches!(r, Err(Error::SamplingFailed { wanted: 3, .. })));
}

#[test]
fn parameter_reduction() {
    let t = tbl();
    let (a0, a1, a2) = (t.sym("a0").unwrap(), t.sym("a1").unwrap(), t.sym("a2").unwrap());
    let rel = AffineRelation::new(&t, vec![(a0, qi(1)), (a1, qi(2)), (a2, qi(2))], qi(1), a2).unwrap();
    let r = rel.reduce(&e(&t, "a0+2*a1+2*a2")).unwrap();
    assert_eq!(r, e(&t, "1"));
    let r = rel.reduce(&e(&t, "a2")).unwrap();
    assert_eq!(r, e(&t, "(1-a0-2*a1)/2"));
    let rel13 = AffineRelation::new(&t, vec![(a0, qi(1)), (a1, qi(1))], qi(1), a1).unwrap();
    assert_eq!(rel13.reduce(&e(&t, "a0+a1")).unwrap(), e(&t, "1"));
    let rel0 = AffineRelation::new(&t, vec![(a0, qi(1)), (a1, qi(1))], qi(0), a1).unwrap();
    assert_eq!(rel0.reduce(&e(&t, "a0+a1")).unwrap(), e(&t, "0"));
    assert!(matches!(rel0.with_eliminated(a2), Err(Error::RelationNotSolvable(_))));
    assert_eq!(rel0.with_eliminated(a0).unwrap().reduce(&e(&t, "a0")).unwrap(), e(&t, "-a1"));
}

#[test]
fn display_round_trip_on_fixed_cases() {
    let t = tbl();
    for s in ["2*x*y^2 - 1/2*w^2 + a0*z", "-x", "(x+1)/(2*z^2 - y)", "3/7", "0", "-(x*y)/w"] {
        let v = e(&t, s);
        assert_eq!(e(&t, &v.to_string()), v, "{s}");
    }
}

#[test]
fn parse_errors_report_position() {
    let t = tbl();
    assert!(matches!(parse_expr(&t, "x + * y"), Err(Error::Parse { pos: 4, .. })));
    assert!(matches!(parse_expr(&t, "x + q"), Err(Error::UnknownSymbol(_))));
    assert!(matches!(parse_expr(&t, "x / 0"), Err(Error::Parse { .. })));
    assert!(matches!(parse_expr(&t, "(x"), Err(Error::Parse { .. })));
}

// ---- property tests ----

fn arb_poly(t: Arc<VarTable>, max_terms: usize) -> impl Strategy<Value = Polynomial> {
    let nvars = 4usize;
    prop::collection::vec((prop::collection::vec(0u32..3, nvars), -5i64..=5, 1i64..=3), 0..=max_terms).prop_map(
        move |terms| {
            Polynomial::from_terms(
                &t,
                terms.into_iter().map(|(exps, n, d)| {
                    let pairs: Vec<(Sym, u32)> =
                        exps.iter().enumerate().map(|(i, &e)| (t.symbols().nth(i).unwrap(), e)).collect();
                    (Monomial::from_exponents(&pairs), q(n, d))
                }),
            )
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(a in arb_poly(tbl(), 4), b in arb_poly(tbl(), 4), c in arb_poly(tbl(), 4)) {
        prop_assert_eq!((&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
    }

    #[test]
    fn exact_division_inverts_multiplication(a in arb_poly(tbl(), 4), b in arb_poly(tbl(), 4)) {
        prop_assume!(!b.is_zero());
        let prod = &a * &b;
        prop_assert_eq!(prod.exact_divide(&b).unwrap(), Some(a));
    }

    #[test]
    fn jacobi_identity(a in arb_poly(tbl(), 3), b in arb_poly(tbl(), 3), c in arb_poly(tbl(), 3)) {
        let t = a.table().clone();
        let s = CanonicalStructure::from_names(&t, &[("x", "y"), ("z", "w")]).unwrap();
        let br = |f: &Polynomial, g: &Polynomial| poisson_bracket_poly(f, g, &s).unwrap();
        let total = br(&a, &br(&b, &c)) + br(&b, &br(&c, &a)) + br(&c, &br(&a, &b));
        prop_assert!(total.is_zero());
    }

    #[test]
    fn bracket_is_antisymmetric_and_leibniz(a in arb_poly(tbl(), 3), b in arb_poly(tbl(), 3), c in arb_poly(tbl(), 3)) {
        let t = a.table().clone();
        let s = CanonicalStructure::from_names(&t, &[("x", "y"), ("z", "w")]).unwrap();
        let br = |f: &Polynomial, g: &Polynomial| poisson_bracket_poly(f, g, &s).unwrap();
        prop_assert_eq!(br(&a, &b), -br(&b, &a));
        prop_assert_eq!(br(&a, &(&b * &c)), &br(&a, &b) * &c + &b * &br(&a, &c));
    }

    #[test]
    fn symbolic_and_sampled_equality_agree(a in arb_poly(tbl(), 3), b in arb_poly(tbl(), 3), d in arb_poly(tbl(), 2), equal in any::<bool>()) {
        prop_assume!(!d.is_zero());
        let lhs = RationalExpr::new(&a * &d, d.clone()).unwrap();
        let rhs = if equal { RationalExpr::from_poly(a.clone()) } else { RationalExpr::from_poly(b.clone()) };
        let sym = is_identically_equal(&lhs, &rhs, IdentityMode::Symbolic).unwrap();
        let smp = is_identically_equal(&lhs, &rhs, IdentityMode::sampled(11)).unwrap();
        prop_assert_eq!(sym, smp);
        if equal { prop_assert!(sym); }
    }

    #[test]
    fn display_parse_round_trip(a in arb_poly(tbl(), 5), d in arb_poly(tbl(), 3)) {
        prop_assume!(!d.is_zero());
        let t = a.table().clone();
        let r = RationalExpr::new(a, d).unwrap();
        prop_assert_eq!(parse_expr(&t, &r.to_string()).unwrap(), r);
    }

    #[test]
    fn substitution_then_inverse_is_identity(a in arb_poly(tbl(), 4)) {
        let t = a.table().clone();
        let z = t.sym("z").unwrap();
        let w = t.sym("w").unwrap();
        let z0 = t.sym("z0").unwrap();
        let w0 = t.sym("w0").unwrap();
        // chart z0 = 1/z, w0 = -(w z + a0) z and its inverse
        let fwd = [(z0, e(&t, "1/z")), (w0, e(&t, "-(w*z+a0)*z"))];
        let inv = [(z, e(&t, "1/z0")), (w, e(&t, "-w0*z0^2-a0*z0"))];
        let f = RationalExpr::from_poly(a.clone());
        let there = substitute(&f, &inv).unwrap();
        let back = substitute(&there, &fwd).unwrap();
        prop_assert!(back.equals(&f).unwrap());
    }
}
