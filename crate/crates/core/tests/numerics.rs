use coupled_painleve::algebra::rat;
use coupled_painleve::backlund::{explicit_generator, generator_names, BirationalMap};
use coupled_painleve::divisors::divisor_table;
use coupled_painleve::numerics::*;
use coupled_painleve::*;
use twofloat::TwoFloat;

fn tf(x: f64) -> TwoFloat {
    TwoFloat::from(x)
}

fn cfg() -> IntegratorConfig {
    IntegratorConfig::default()
}

#[test]
fn autonomous_subsystem_conserves_its_hamiltonian() {
    let (sys, s0) = presets::auto_control();
    let r = check_conservation(&sys, &s0, tf(1.0), &cfg()).unwrap();
    assert!(r.passed(), "{r:?}");
    assert!(r.payload["abs_delta_h"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn zero_length_run_returns_the_start() {
    let sys = build_system(SystemKind::D3);
    let s0 = presets::generic(&sys).unwrap();
    let tr = integrate(&sys, &s0, s0.t, &cfg()).unwrap();
    assert_eq!(tr.times.len(), 1);
    assert_eq!(tr.last().1, &s0.vars[..]);
}

#[test]
fn malformed_inputs_are_rejected() {
    let sys = build_system(SystemKind::D3);
    let mut s0 = presets::generic(&sys).unwrap();
    s0.vars.pop();
    assert!(integrate(&sys, &s0, tf(1.0), &cfg()).is_err());
    let s1 = presets::generic(&sys).unwrap();
    assert!(integrate(&sys, &s1, tf(1.0), &IntegratorConfig::with_tolerance(-1.0)).is_err());
    assert!(complete_alpha(&sys, &[rat(1, 3)]).is_err());
    assert_eq!(
        complete_alpha(&sys, &[rat(1, 4), rat(1, 8)]).unwrap()[2],
        rat(1, 8)
    );
}

/// Oracle: scipy DOP853 at rtol = atol = 1e-12 on the hand-written D3 field.
const D3_WITNESS_DELTA_H: f64 = 0.021647765546524922;
const D3_WITNESS_POLE: f64 = 0.49872517800697463;

#[test]
fn d3_witness_is_not_conserved() {
    let sys = build_system(SystemKind::D3);
    let w = presets::witness(&sys).unwrap();
    let r = check_nonconservation(&sys, &w, tf(presets::WITNESS_T_END), &cfg()).unwrap();
    assert!(r.passed(), "{r:?}");
    let dh = r.payload["abs_delta_h"].as_f64().unwrap();
    assert!((dh - D3_WITNESS_DELTA_H).abs() < 1e-9, "{dh}");
}

#[test]
fn witness_over_the_unit_interval_meets_a_pole() {
    let sys = build_system(SystemKind::D3);
    let w = presets::witness(&sys).unwrap();
    let r = check_nonconservation(&sys, &w, tf(1.0), &cfg()).unwrap();
    assert_eq!(r.status, Status::Inconclusive);
    assert!(r.payload.contains_key("last_good_state"));
    let reached: f64 = r.payload["reached_t"].as_str().unwrap().parse().unwrap();
    assert!((reached - D3_WITNESS_POLE).abs() < 1e-6, "{reached}");
}

#[test]
fn d5_witness_is_not_conserved() {
    let sys = build_system(SystemKind::D5);
    let w = presets::witness(&sys).unwrap();
    let r = check_nonconservation(&sys, &w, tf(presets::WITNESS_T_END), &cfg()).unwrap();
    assert!(r.passed(), "{r:?}");
}

#[test]
fn backlund_generators_commute_with_the_flow() {
    for kind in [SystemKind::D3, SystemKind::D5] {
        let sys = build_system(kind);
        let s0 = presets::generic(&sys).unwrap();
        for name in generator_names(kind) {
            let m = explicit_generator(&sys, name).unwrap();
            let r = check_backlund_numeric(&m, &sys, &s0, tf(0.5), &cfg()).unwrap();
            assert!(r.passed(), "{kind} {name}: {r:?}");
            assert!(r.payload["max_deviation"].as_f64().unwrap() <= 1e-6);
        }
    }
}

#[test]
fn identity_map_has_no_deviation() {
    let sys = build_system(SystemKind::D3);
    let s0 = presets::generic(&sys).unwrap();
    let m = BirationalMap::identity(&sys.registry);
    let r = check_backlund_numeric(&m, &sys, &s0, tf(0.5), &cfg()).unwrap();
    assert!(r.passed());
    assert!(r.payload["max_deviation"].as_f64().unwrap() < 1e-25);
}

#[test]
fn a_wrong_map_is_caught() {
    let sys = build_system(SystemKind::D3);
    let s0 = presets::generic(&sys).unwrap();
    let mut m = explicit_generator(&sys, "s1").unwrap();
    // keep the variable part, drop the parameter action
    m.params = BirationalMap::identity(&sys.registry).params;
    let r = check_backlund_numeric(&m, &sys, &s0, tf(0.5), &cfg()).unwrap();
    assert_eq!(r.status, Status::Fail);
}

#[test]
fn start_near_the_indeterminacy_locus_is_inconclusive() {
    let sys = build_system(SystemKind::D3);
    let mut s0 = presets::generic(&sys).unwrap();
    // s1 divides by p2
    let k = sys
        .registry
        .dynamical()
        .iter()
        .position(|&s| sys.registry.name(s) == "p2")
        .unwrap();
    s0.vars[k] = tf(1e-12);
    let m = explicit_generator(&sys, "s1").unwrap();
    let r = check_backlund_numeric(&m, &sys, &s0, tf(0.5), &cfg()).unwrap();
    assert_eq!(r.status, Status::Inconclusive);
    assert_eq!(r.payload["note"], "inconclusive, near indeterminacy locus");
}

#[test]
fn invariant_divisors_do_not_drift() {
    for kind in [SystemKind::D3, SystemKind::D5] {
        let sys = build_system(kind);
        let base = presets::generic(&sys).unwrap();
        for e in divisor_table(&sys) {
            let r = check_divisor_drift(&sys, &e, &base, tf(presets::DRIFT_T_END), &cfg()).unwrap();
            assert!(r.passed(), "{kind} f{}: {r:?}", e.index);
        }
    }
}

#[test]
fn drift_run_cut_by_a_pole_is_inconclusive() {
    let sys = build_system(SystemKind::D3);
    let base = presets::generic(&sys).unwrap();
    let f0 = &divisor_table(&sys)[0];
    let r = check_divisor_drift(&sys, f0, &base, tf(1.0), &cfg()).unwrap();
    assert_eq!(r.status, Status::Inconclusive, "{r:?}");
    assert!(r.payload["max_abs_divisor"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn p2_zero_stays_zero() {
    let sys = build_system(SystemKind::D3);
    let base = presets::generic(&sys).unwrap();
    let f1 = &divisor_table(&sys)[1];
    let s0 = divisor_start(&sys, f1, &base).unwrap();
    assert_eq!(s0.alpha[1], rat(0, 1));
    let tr = integrate(&sys, &s0, tf(1.0), &cfg()).unwrap();
    let k = sys
        .registry
        .dynamical()
        .iter()
        .position(|&s| sys.registry.name(s) == "p2")
        .unwrap();
    assert!(tr.states.iter().all(|y| to_f64(y[k]).abs() <= 1e-9));
}

#[test]
fn halving_the_tolerance_converges() {
    for kind in [SystemKind::D3, SystemKind::D5] {
        let sys = build_system(kind);
        let s0 = presets::generic(&sys).unwrap();
        let r = check_tolerance_halving(&sys, &s0, tf(1.0), 1e-10).unwrap();
        assert!(r.passed(), "{r:?}");
    }
}

#[test]
fn csv_export_has_all_columns() {
    let sys = build_system(SystemKind::D3);
    let s0 = presets::generic(&sys).unwrap();
    let tr = integrate(&sys, &s0, tf(0.1), &cfg()).unwrap();
    let mut buf = Vec::new();
    write_csv(&sys, &s0.alpha, &tr, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,q1,p1,q2,p2,H,f0,f1,f2");
    assert_eq!(lines.count(), tr.times.len());
}

#[test]
fn runs_are_deterministic() {
    let sys = build_system(SystemKind::D5);
    let s0 = presets::generic(&sys).unwrap();
    let a = integrate(&sys, &s0, tf(0.5), &cfg()).unwrap();
    let b = integrate(&sys, &s0, tf(0.5), &cfg()).unwrap();
    assert_eq!(a.states, b.states);
}
