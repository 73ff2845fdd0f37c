use coupled_painleve::algebra::parse_ratfunc;
use coupled_painleve::charts::*;
use coupled_painleve::*;

fn d3() -> HamiltonianSystem {
    build_system(SystemKind::D3)
}

#[test]
fn transcribed_forward_and_inverse_maps() {
    let sys = d3();
    let r1 = chart(&sys, "r1").unwrap();
    assert_eq!(r1.forward[2], sys.ratfunc("1/q2").unwrap());
    assert_eq!(r1.forward[3], sys.ratfunc("-(q2*p2 + alpha1)*q2").unwrap());
    assert_eq!(r1.inverse[2], parse_ratfunc(&r1.registry, "1/z1").unwrap());
    assert_eq!(
        r1.inverse[3],
        parse_ratfunc(&r1.registry, "-(w1*z1 + alpha1)*z1").unwrap()
    );
    let r0 = chart(&sys, "r0").unwrap();
    assert_eq!(
        r0.forward[1],
        sys.ratfunc("-((p1 + q2^2/4)*q1 + alpha0)*q1").unwrap()
    );
    assert_eq!(r0.registry.name(r0.inverted), "x0");

    let d5 = build_system(SystemKind::D5);
    let r4 = chart(&d5, "r4").unwrap();
    assert_eq!(
        r4.forward[7],
        d5.ratfunc("-((p4 + q3^2/4)*q4 + alpha4)*q4").unwrap()
    );
    assert_eq!(r4.registry.name(r4.registry.dynamical()[7]), "u4");
    assert_eq!(chart(&d5, "r2").unwrap().correction, d5.poly("q2").unwrap());
    assert_eq!(
        chart(&sys, "r2").unwrap().correction,
        sys.poly("q1").unwrap()
    );
}

#[test]
fn unknown_charts() {
    assert!(matches!(chart(&d3(), "r3"), Err(Error::UnknownChart(_))));
    assert!(matches!(
        chart(&build_system(SystemKind::D5), "r9"),
        Err(Error::UnknownChart(_))
    ));
}

#[test]
fn every_chart_round_trips_and_is_symplectic() {
    for kind in [SystemKind::D3, SystemKind::D5] {
        let sys = build_system(kind);
        for c in all_charts(&sys).unwrap() {
            assert!(c.round_trip(&sys).unwrap(), "{kind} {}", c.label);
            assert!(c.is_symplectic().unwrap(), "{kind} {}", c.label);
        }
    }
}

#[test]
fn wrong_inverse_fails_round_trip() {
    let sys = d3();
    let names: Vec<String> = ["x1", "y1", "z1", "w1"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let c = Chart::from_text(
        &sys,
        "r1-bad",
        &names,
        &["q1", "p1", "1/q2", "-(q2*p2 + alpha1)*q2"],
        &["x1", "y1", "1/z1", "-(w1*z1 - alpha1)*z1"],
        "0",
        "z1",
    )
    .unwrap();
    assert!(!c.round_trip(&sys).unwrap());
}

#[test]
fn identity_chart_reproduces_the_vector_field() {
    let sys = d3();
    let names: Vec<String> = ["Q1", "P1", "Q2", "P2"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let c = Chart::from_text(
        &sys,
        "id",
        &names,
        &["q1", "p1", "q2", "p2"],
        &["Q1", "P1", "Q2", "P2"],
        "0",
        "Q1",
    )
    .unwrap();
    let vf = pushforward(&sys, &c).unwrap();
    let orig = sys.vector_field();
    for (a, b) in vf.components.iter().zip(&orig.components) {
        let text = a.to_string().replace('Q', "q").replace('P', "p");
        assert_eq!(sys.ratfunc(&text).unwrap(), *b);
    }
    let r = check_polynomial_hamiltonian(&sys, &vf, &c, false).unwrap();
    assert!(r.passed());
    assert_eq!(r.payload["matches_transformed_hamiltonian"], true);
    assert_eq!(r.payload["difference"], "0");
}

#[test]
fn holomorphy_in_every_chart() {
    for kind in [SystemKind::D3, SystemKind::D5] {
        let sys = build_system(kind);
        for r in verify_all_charts(&sys).unwrap() {
            assert!(r.passed(), "{kind} {}: {:?}", r.subject, r.payload);
            assert_eq!(r.payload["matches_transformed_hamiltonian"], true);
            // only r2 needs the normalization
            assert_eq!(
                r.payload["relation_required"],
                r.subject == "r2",
                "{kind} {}",
                r.subject
            );
        }
    }
}

#[test]
fn recovered_hamiltonian_generates_the_field() {
    let sys = d3();
    let c = chart(&sys, "r0").unwrap();
    let vf = pushforward(&sys, &c).unwrap();
    let r = check_polynomial_hamiltonian(&sys, &vf, &c, false).unwrap();
    let k = coupled_painleve::algebra::parse_poly(
        &c.registry,
        r.payload["hamiltonian"].as_str().unwrap(),
    )
    .unwrap();
    // K vanishes at the origin of the new variables for every t
    let zero: Vec<_> = c
        .registry
        .dynamical()
        .into_iter()
        .map(|v| (v, num_rational::BigRational::from_integer(0.into())))
        .collect();
    assert!(k.eval_at(&zero).is_zero());
    let field = coupled_painleve::systems::vector_field_of(&k);
    for (a, b) in field.components.iter().zip(&vf.components) {
        assert_eq!(a, b);
    }
    // the r0 Hamiltonian is H written in the new variables
    let inv = c.inverse_substitution(&sys).unwrap();
    assert_eq!(
        inv.apply_poly(&sys.hamiltonian)
            .unwrap()
            .to_poly()
            .unwrap()
            .unwrap(),
        k
    );
}

#[test]
fn broken_chart_has_a_pole() {
    let sys = d3();
    let names: Vec<String> = ["x0", "y0", "z0", "w0"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    // y0 without the alpha0 term
    let c = Chart::from_text(
        &sys,
        "r0-broken",
        &names,
        &["1/q1", "-(p1 + q2^2/4)*q1^2", "q2", "p2 + q1*q2/2"],
        &["1/x0", "-x0^2*y0 - z0^2/4", "z0", "w0 - z0/(2*x0)"],
        "0",
        "x0",
    )
    .unwrap();
    assert!(c.round_trip(&sys).unwrap());
    let vf = pushforward(&sys, &c).unwrap();
    let r = check_polynomial_hamiltonian(&sys, &vf, &c, false).unwrap();
    assert_eq!(r.status, Status::Fail);
    assert_eq!(r.payload["polynomial"], false);
}

#[test]
fn r2_without_the_normalization_is_not_polynomial() {
    let sys = d3();
    let c = chart(&sys, "r2").unwrap();
    let vf = pushforward(&sys, &c).unwrap();
    let r = check_polynomial_hamiltonian(&sys, &vf, &c, false).unwrap();
    assert_eq!(r.payload["polynomial"], false);
    assert!(check_polynomial_hamiltonian(&sys, &vf, &c, true)
        .unwrap()
        .passed());
}
