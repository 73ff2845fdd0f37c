use std::sync::{Arc, OnceLock};

use coupled_painleve::algebra::{rat, Monomial, MultiPoly, RatFunc, Substitution, VarRegistry};
use coupled_painleve::characterize::linear::ExactLinearSystem;
use coupled_painleve::systems::poisson_bracket;
use coupled_painleve::Error;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

fn reg() -> &'static Arc<VarRegistry> {
    static REG: OnceLock<Arc<VarRegistry>> = OnceLock::new();
    REG.get_or_init(|| {
        VarRegistry::builder()
            .pair("q1", "p1")
            .pair("q2", "p2")
            .time("t")
            .param("a")
            .build()
            .unwrap()
    })
}

fn coeff() -> impl Strategy<Value = BigRational> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| rat(n, d))
}

/// Up to five terms of degree at most two in each symbol.
fn poly() -> impl Strategy<Value = MultiPoly> {
    let n = reg().len();
    prop::collection::vec((prop::collection::vec(0u32..=2, n), coeff()), 0..5).prop_map(|terms| {
        MultiPoly::from_terms(
            reg(),
            terms.into_iter().map(|(e, c)| (Monomial::from_exps(e), c)),
        )
    })
}

fn nonzero_poly() -> impl Strategy<Value = MultiPoly> {
    poly().prop_filter("nonzero", |p| !p.is_zero())
}

fn add(a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
    a.checked_add(b).unwrap()
}

fn mul(a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
    a.checked_mul(b).unwrap()
}

fn bracket(a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
    poisson_bracket(a, b).unwrap()
}

fn rf(p: &MultiPoly) -> RatFunc {
    RatFunc::from_poly(p.clone())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(add(&a, &b), add(&b, &a));
        prop_assert_eq!(mul(&a, &b), mul(&b, &a));
        prop_assert_eq!(add(&add(&a, &b), &c), add(&a, &add(&b, &c)));
        prop_assert_eq!(mul(&mul(&a, &b), &c), mul(&a, &mul(&b, &c)));
        prop_assert_eq!(mul(&a, &add(&b, &c)), add(&mul(&a, &b), &mul(&a, &c)));
        prop_assert!(a.checked_sub(&a).unwrap().is_zero());
        prop_assert_eq!(mul(&a, &MultiPoly::one(reg())), a.clone());
        prop_assert_eq!(add(&a, &-&a), MultiPoly::zero(reg()));
    }

    #[test]
    fn exact_division_recovers_the_factor(a in poly(), b in nonzero_poly()) {
        prop_assert_eq!(mul(&a, &b).try_div(&b).unwrap(), Some(a));
    }

    #[test]
    fn common_factors_cancel(a in poly(), b in nonzero_poly(), c in nonzero_poly()) {
        let x = RatFunc::new(mul(&a, &c), mul(&b, &c)).unwrap();
        let y = RatFunc::new(a.clone(), b.clone()).unwrap();
        prop_assert!(x.equals(&y).unwrap());
        let back = x.checked_mul(&rf(&b)).unwrap();
        prop_assert!(back.equals(&rf(&a)).unwrap());
    }

    #[test]
    fn fraction_sums(a in poly(), b in nonzero_poly(), c in poly(), d in nonzero_poly()) {
        let x = RatFunc::new(a.clone(), b.clone()).unwrap();
        let y = RatFunc::new(c.clone(), d.clone()).unwrap();
        let num = add(&mul(&a, &d), &mul(&c, &b));
        let direct = RatFunc::new(num, mul(&b, &d)).unwrap();
        prop_assert!(x.checked_add(&y).unwrap().equals(&direct).unwrap());
        prop_assert!(x.checked_sub(&x).unwrap().is_zero());
    }

    #[test]
    fn derivative_is_a_derivation(a in poly(), b in poly(), k in coeff(), v in 0usize..6) {
        let lin = add(&a.scale(&k), &b).derivative(v);
        prop_assert_eq!(lin, add(&a.derivative(v).scale(&k), &b.derivative(v)));
        let leibniz = mul(&a, &b).derivative(v);
        prop_assert_eq!(leibniz, add(&mul(&a.derivative(v), &b), &mul(&a, &b.derivative(v))));
    }

    #[test]
    fn quotient_rule(a in poly(), b in nonzero_poly(), v in 0usize..6) {
        let f = RatFunc::new(a.clone(), b.clone()).unwrap();
        let num = mul(&a.derivative(v), &b).checked_sub(&mul(&a, &b.derivative(v))).unwrap();
        let want = RatFunc::new(num, mul(&b, &b)).unwrap();
        prop_assert!(f.derivative(v).unwrap().equals(&want).unwrap());
    }

    #[test]
    fn substitution_is_a_ring_map(a in poly(), b in poly(), i1 in poly(), i2 in nonzero_poly()) {
        let s = Substitution::by_name(reg(), &[("q1", rf(&i1)), ("p2", RatFunc::new(i1.clone(), i2).unwrap())]).unwrap();
        let sa = s.apply_poly(&a).unwrap();
        let sb = s.apply_poly(&b).unwrap();
        prop_assert!(s.apply_poly(&mul(&a, &b)).unwrap().equals(&sa.checked_mul(&sb).unwrap()).unwrap());
        prop_assert!(s.apply_poly(&add(&a, &b)).unwrap().equals(&sa.checked_add(&sb).unwrap()).unwrap());
    }

    #[test]
    fn substitutions_compose(a in poly(), i1 in poly(), i2 in poly()) {
        let s = Substitution::by_name(reg(), &[("q1", rf(&i1)), ("t", rf(&i2))]).unwrap();
        let u = Substitution::by_name(reg(), &[("p1", rf(&i2)), ("q2", rf(&i1))]).unwrap();
        let both = s.then(&u).unwrap().apply_poly(&a).unwrap();
        let stepwise = u.apply(&s.apply_poly(&a).unwrap()).unwrap();
        prop_assert!(both.equals(&stepwise).unwrap());
        prop_assert!(Substitution::identity(reg()).apply_poly(&a).unwrap().equals(&rf(&a)).unwrap());
    }

    #[test]
    fn bracket_is_a_lie_bracket(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(bracket(&a, &b), -bracket(&b, &a));
        let jacobi = add(
            &add(&bracket(&a, &bracket(&b, &c)), &bracket(&b, &bracket(&c, &a))),
            &bracket(&c, &bracket(&a, &b)),
        );
        prop_assert!(jacobi.is_zero());
        prop_assert_eq!(bracket(&a, &mul(&b, &c)), add(&mul(&bracket(&a, &b), &c), &mul(&b, &bracket(&a, &c))));
    }

    #[test]
    fn linear_solutions_satisfy_the_system(
        rows in prop::collection::vec(prop::collection::vec(-3i64..=3, 5), 0..7),
        x0 in prop::collection::vec(coeff(), 5),
    ) {
        let mut sys = ExactLinearSystem::new(5);
        for r in &rows {
            let rhs: BigRational = r.iter().zip(&x0).map(|(a, x)| rat(*a, 1) * x).sum();
            sys.add_row(r.iter().enumerate().map(|(j, a)| (j, rat(*a, 1))), rhs).unwrap();
        }
        prop_assert!(sys.is_satisfied_by(&x0));
        let sol = sys.solve().unwrap();
        prop_assert!(sys.is_satisfied_by(&sol.particular));
        for (k, v) in sol.nullspace.iter().enumerate() {
            prop_assert!(v.iter().any(|x| !x.is_zero()));
            let shifted: Vec<BigRational> = sol.particular.iter().zip(v).map(|(p, x)| p + x).collect();
            prop_assert!(sys.is_satisfied_by(&shifted));
            // independent: each direction is the only one with its free coordinate set
            let free: Vec<usize> = (0..5).filter(|j| !sol.pivots.contains(j)).collect();
            prop_assert_eq!(free.len(), sol.dimension());
            for (m, w) in sol.nullspace.iter().enumerate() {
                prop_assert_eq!(w[free[k]].is_zero(), m != k);
            }
        }
        prop_assert_eq!(sol.pivots.len() + sol.dimension(), 5);
    }

    #[test]
    fn contradictions_are_reported(r in prop::collection::vec(-3i64..=3, 4), b in 1i64..5) {
        let mut sys = ExactLinearSystem::new(4);
        sys.add_row(r.iter().enumerate().map(|(j, a)| (j, rat(*a, 1))), rat(0, 1)).unwrap();
        sys.add_row(r.iter().enumerate().map(|(j, a)| (j, rat(*a, 1))), rat(b, 1)).unwrap();
        prop_assert!(matches!(sys.solve(), Err(Error::Inconsistent(_))));
    }
}
