//! Numerical cross-checks: the symbolic vector fields compiled to
//! double-double arithmetic and integrated with an adaptive Runge–Kutta pair.
//! Numerical results are diagnostics only; they never override a symbolic
//! verdict.

pub mod compiled;
pub mod dopri;

use std::io::Write;
use std::time::Instant;

use num_rational::BigRational;
use num_traits::Zero;
pub use twofloat::TwoFloat;

use crate::algebra::{fmt_rational, rat};
use crate::backlund::BirationalMap;
use crate::divisors::{divisor_table, DivisorEntry};
use crate::error::{Error, Result};
use crate::report::{Status, VerificationReport};
use crate::systems::{build_auto_subsystem, HamiltonianSystem, SystemKind};

pub use compiled::{div, parse_number, rational_to_tf, to_f64, CompiledPoly, CompiledRatFunc};
pub use dopri::{integrate_fn, IntegratorConfig, StopReason, Trajectory};

/// Denominators of a map smaller than this along a path make a Bäcklund
/// comparison inconclusive.
pub const DENOMINATOR_THRESHOLD: f64 = 1e-8;
pub const BACKLUND_TOLERANCE: f64 = 1e-6;
pub const NONCONSERVATION_THRESHOLD: f64 = 1e-3;
pub const CONSERVATION_TOLERANCE: f64 = 1e-9;
pub const DRIFT_TOLERANCE: f64 = 1e-9;

/// A point of phase space with its time and (exact) parameter values.
/// `vars` follows the registry's dynamical order, `alpha` its parameter order.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericState {
    pub t: TwoFloat,
    pub vars: Vec<TwoFloat>,
    pub alpha: Vec<BigRational>,
}

impl NumericState {
    pub fn from_rationals(t: &BigRational, vars: &[BigRational], alpha: &[BigRational]) -> Self {
        NumericState {
            t: rational_to_tf(t),
            vars: vars.iter().map(rational_to_tf).collect(),
            alpha: alpha.to_vec(),
        }
    }

    fn check(&self, sys: &HamiltonianSystem) -> Result<()> {
        let n = sys.registry.dynamical().len();
        if self.vars.len() != n {
            return Err(Error::InvalidInput(format!(
                "{} expects {n} state entries, got {}",
                sys.label,
                self.vars.len()
            )));
        }
        let m = sys.params().len();
        if self.alpha.len() != m {
            return Err(Error::InvalidInput(format!(
                "{} expects {m} parameters, got {}",
                sys.label,
                self.alpha.len()
            )));
        }
        if !self
            .vars
            .iter()
            .chain([&self.t])
            .all(|v| compiled::is_finite(*v))
        {
            return Err(Error::InvalidInput("state entries must be finite".into()));
        }
        Ok(())
    }

    pub fn alpha_assignment(&self, sys: &HamiltonianSystem) -> Vec<(usize, BigRational)> {
        sys.params()
            .into_iter()
            .zip(self.alpha.iter().cloned())
            .collect()
    }
}

/// Fills in the relation target from the normalization when `alpha` has one
/// entry fewer than the system has parameters.
pub fn complete_alpha(sys: &HamiltonianSystem, alpha: &[BigRational]) -> Result<Vec<BigRational>> {
    let m = sys.params().len();
    match &sys.normalization {
        Some(n) if alpha.len() + 1 == m => {
            let mut out = alpha.to_vec();
            out.push(alpha.iter().fold(n.clone(), |acc, a| acc - a));
            Ok(out)
        }
        _ if alpha.len() == m => Ok(alpha.to_vec()),
        _ => Err(Error::InvalidInput(format!(
            "{} expects {m} parameters, got {}",
            sys.label,
            alpha.len()
        ))),
    }
}

/// The vector field, Hamiltonian and divisors at fixed parameter values.
#[derive(Debug, Clone)]
pub struct CompiledSystem {
    slots: Vec<usize>,
    time: Option<usize>,
    width: usize,
    field: Vec<CompiledPoly>,
    hamiltonian: CompiledPoly,
    divisors: Vec<CompiledPoly>,
}

impl CompiledSystem {
    pub fn new(sys: &HamiltonianSystem, alpha: &[BigRational]) -> Result<Self> {
        let assign: Vec<(usize, BigRational)> = sys
            .params()
            .into_iter()
            .zip(alpha.iter().cloned())
            .collect();
        let vf = sys.vector_field();
        let field = vf
            .components
            .iter()
            .map(|c| {
                let p = c
                    .to_poly()?
                    .ok_or_else(|| Error::InvalidInput("vector field is not polynomial".into()))?;
                Ok(CompiledPoly::new(&p.eval_at(&assign)))
            })
            .collect::<Result<_>>()?;
        let divisors = match sys.kind {
            Some(_) => divisor_table(sys)
                .iter()
                .map(|d| CompiledPoly::new(&d.divisor.eval_at(&assign)))
                .collect(),
            None => Vec::new(),
        };
        Ok(CompiledSystem {
            slots: vf.vars.clone(),
            time: sys.registry.time(),
            width: sys.registry.len(),
            field,
            hamiltonian: CompiledPoly::new(&sys.hamiltonian.eval_at(&assign)),
            divisors,
        })
    }

    /// Registry-indexed values for a time and state.
    pub fn values(&self, t: TwoFloat, y: &[TwoFloat]) -> Vec<TwoFloat> {
        let mut v = vec![TwoFloat::from(0.0); self.width];
        for (&s, &x) in self.slots.iter().zip(y) {
            v[s] = x;
        }
        if let Some(ts) = self.time {
            v[ts] = t;
        }
        v
    }

    pub fn rhs(&self, t: TwoFloat, y: &[TwoFloat]) -> Option<Vec<TwoFloat>> {
        let v = self.values(t, y);
        let out: Vec<TwoFloat> = self.field.iter().map(|c| c.eval(&v)).collect();
        out.iter().all(|x| compiled::is_finite(*x)).then_some(out)
    }

    pub fn hamiltonian(&self, t: TwoFloat, y: &[TwoFloat]) -> TwoFloat {
        self.hamiltonian.eval(&self.values(t, y))
    }

    pub fn divisor(&self, i: usize, t: TwoFloat, y: &[TwoFloat]) -> TwoFloat {
        self.divisors[i].eval(&self.values(t, y))
    }

    pub fn num_divisors(&self) -> usize {
        self.divisors.len()
    }
}

pub fn integrate(
    sys: &HamiltonianSystem,
    state0: &NumericState,
    t_end: TwoFloat,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    state0.check(sys)?;
    cfg.validate().map_err(Error::InvalidInput)?;
    let cs = CompiledSystem::new(sys, &state0.alpha)?;
    Ok(integrate_fn(
        |t, y| cs.rhs(t, y),
        state0.t,
        &state0.vars,
        t_end,
        cfg,
    ))
}

fn fmt_tf(x: TwoFloat) -> String {
    format!("{:.17e}", to_f64(x))
}

fn state_text(sys: &HamiltonianSystem, y: &[TwoFloat]) -> serde_json::Value {
    serde_json::Value::Object(
        sys.registry
            .dynamical()
            .into_iter()
            .zip(y)
            .map(|(s, v)| (sys.registry.name(s).to_string(), fmt_tf(*v).into()))
            .collect(),
    )
}

fn alpha_text(sys: &HamiltonianSystem, alpha: &[BigRational]) -> serde_json::Value {
    serde_json::Value::Object(
        sys.params()
            .into_iter()
            .zip(alpha)
            .map(|(a, v)| (sys.registry.name(a).to_string(), fmt_rational(v).into()))
            .collect(),
    )
}

fn put_truncation(report: &mut VerificationReport, sys: &HamiltonianSystem, traj: &Trajectory) {
    let (t, y) = traj.last();
    report
        .put("steps", traj.times.len() - 1)
        .put("rejected_steps", traj.rejected)
        .put("reached_t", fmt_tf(t));
    match &traj.stopped {
        Some(r) => {
            report
                .put("truncated", r.as_str())
                .put("last_good_state", state_text(sys, y));
        }
        None => {
            report.put("truncated", serde_json::Value::Null);
        }
    }
}

/// Report for a plain integration run: end state and Hamiltonian change.
pub fn integration_report(
    sys: &HamiltonianSystem,
    state0: &NumericState,
    t_end: TwoFloat,
    cfg: &IntegratorConfig,
) -> Result<(VerificationReport, Trajectory)> {
    let start = Instant::now();
    let traj = integrate(sys, state0, t_end, cfg)?;
    let cs = CompiledSystem::new(sys, &state0.alpha)?;
    let mut r = VerificationReport::new("integrate", &sys.label, "trajectory");
    let (t, y) = traj.last();
    r.put("alpha", alpha_text(sys, &state0.alpha))
        .put("t_start", fmt_tf(state0.t))
        .put("t_end", fmt_tf(t_end))
        .put("end_state", state_text(sys, y))
        .put(
            "hamiltonian_change",
            fmt_tf(cs.hamiltonian(t, y) - cs.hamiltonian(state0.t, &state0.vars)),
        );
    put_truncation(&mut r, sys, &traj);
    let status = if traj.completed() {
        Status::ReportOnly
    } else {
        Status::Inconclusive
    };
    Ok((r.with_status(status).timed(start), traj))
}

fn max_abs_diff(a: &[TwoFloat], b: &[TwoFloat]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| to_f64(*x - *y).abs())
        .fold(0.0, f64::max)
}

/// Integrate-then-map against map-then-integrate (with mapped parameters).
pub fn check_backlund_numeric(
    m: &BirationalMap,
    sys: &HamiltonianSystem,
    state0: &NumericState,
    t_end: TwoFloat,
    cfg: &IntegratorConfig,
) -> Result<VerificationReport> {
    let start = Instant::now();
    state0.check(sys)?;
    let assign = state0.alpha_assignment(sys);
    let images: Vec<CompiledRatFunc> = m
        .images
        .iter()
        .map(|r| Ok(CompiledRatFunc::new(&r.eval_at(&assign)?)))
        .collect::<Result<_>>()?;
    let mapped_alpha: Vec<BigRational> = m
        .params
        .matrix
        .iter()
        .map(|row| {
            row.iter()
                .zip(&state0.alpha)
                .fold(BigRational::zero(), |acc, (&c, a)| acc + a * rat(c, 1))
        })
        .collect();
    let cs = CompiledSystem::new(sys, &state0.alpha)?;
    let apply = |t: TwoFloat, y: &[TwoFloat]| -> (Vec<TwoFloat>, f64) {
        let v = cs.values(t, y);
        let min_den = images
            .iter()
            .map(|r| to_f64(r.den_at(&v)).abs())
            .fold(f64::INFINITY, f64::min);
        (images.iter().map(|r| r.eval(&v)).collect(), min_den)
    };

    let mut report = VerificationReport::new("check-backlund", &sys.label, &m.label);
    report
        .put("alpha", alpha_text(sys, &state0.alpha))
        .put("mapped_alpha", alpha_text(sys, &mapped_alpha))
        .put("t_end", fmt_tf(t_end))
        .put("tolerance", BACKLUND_TOLERANCE);

    let path_a = integrate(sys, state0, t_end, cfg)?;
    let min_den = path_a
        .times
        .iter()
        .zip(&path_a.states)
        .map(|(t, y)| apply(*t, y).1)
        .fold(f64::INFINITY, f64::min);
    report.put("min_denominator", min_den);
    if !path_a.completed() {
        put_truncation(&mut report, sys, &path_a);
        return Ok(report.with_status(Status::Inconclusive).timed(start));
    }
    if min_den < DENOMINATOR_THRESHOLD {
        report.put("note", "inconclusive, near indeterminacy locus");
        return Ok(report.with_status(Status::Inconclusive).timed(start));
    }
    let (t_a, y_a) = path_a.last();
    let (end_a, _) = apply(t_a, y_a);

    let (mapped0, _) = apply(state0.t, &state0.vars);
    let state_b = NumericState {
        t: state0.t,
        vars: mapped0,
        alpha: mapped_alpha,
    };
    let path_b = integrate(sys, &state_b, t_end, cfg)?;
    if !path_b.completed() {
        put_truncation(&mut report, sys, &path_b);
        return Ok(report.with_status(Status::Inconclusive).timed(start));
    }
    let dev = max_abs_diff(&end_a, path_b.last().1);
    report
        .put("integrate_then_map", state_text(sys, &end_a))
        .put("map_then_integrate", state_text(sys, path_b.last().1))
        .put("max_deviation", dev);
    Ok(report
        .with_status(Status::from_bool(dev <= BACKLUND_TOLERANCE))
        .timed(start))
}

fn hamiltonian_change(
    sys: &HamiltonianSystem,
    state0: &NumericState,
    t_end: TwoFloat,
    cfg: &IntegratorConfig,
    task: &str,
) -> Result<(VerificationReport, Option<f64>)> {
    let traj = integrate(sys, state0, t_end, cfg)?;
    let cs = CompiledSystem::new(sys, &state0.alpha)?;
    let mut r = VerificationReport::new(task, &sys.label, "hamiltonian");
    r.put("alpha", alpha_text(sys, &state0.alpha))
        .put("start_state", state_text(sys, &state0.vars))
        .put("t_end", fmt_tf(t_end));
    put_truncation(&mut r, sys, &traj);
    if !traj.completed() {
        return Ok((r, None));
    }
    let (t, y) = traj.last();
    let dh = to_f64(cs.hamiltonian(t, y) - cs.hamiltonian(state0.t, &state0.vars)).abs();
    r.put("abs_delta_h", dh);
    Ok((r, Some(dh)))
}

/// Passes when |H(end) - H(start)| exceeds the non-conservation threshold.
pub fn check_nonconservation(
    sys: &HamiltonianSystem,
    state0: &NumericState,
    t_end: TwoFloat,
    cfg: &IntegratorConfig,
) -> Result<VerificationReport> {
    let start = Instant::now();
    let (mut r, dh) = hamiltonian_change(sys, state0, t_end, cfg, "nonconservation")?;
    r.put("threshold", NONCONSERVATION_THRESHOLD);
    let status = match dh {
        Some(d) => Status::from_bool(d > NONCONSERVATION_THRESHOLD),
        None => Status::Inconclusive,
    };
    Ok(r.with_status(status).timed(start))
}

/// Passes when |H(end) - H(start)| stays within the conservation tolerance.
pub fn check_conservation(
    sys: &HamiltonianSystem,
    state0: &NumericState,
    t_end: TwoFloat,
    cfg: &IntegratorConfig,
) -> Result<VerificationReport> {
    let start = Instant::now();
    let (mut r, dh) = hamiltonian_change(sys, state0, t_end, cfg, "conservation")?;
    r.put("tolerance", CONSERVATION_TOLERANCE);
    let status = match dh {
        Some(d) => Status::from_bool(d <= CONSERVATION_TOLERANCE),
        None => Status::Inconclusive,
    };
    Ok(r.with_status(status).timed(start))
}

/// Parameters with `alpha_i = 0`; under a normalization the highest other
/// parameter absorbs the change.
pub fn divisor_alpha(
    sys: &HamiltonianSystem,
    entry: &DivisorEntry,
    base: &[BigRational],
) -> Vec<BigRational> {
    let params = sys.params();
    let mut alpha = base.to_vec();
    let pos = params
        .iter()
        .position(|&a| a == entry.alpha)
        .expect("parameter of the system");
    let removed = std::mem::replace(&mut alpha[pos], BigRational::zero());
    if sys.normalization.is_some() {
        let other = (0..params.len())
            .rev()
            .find(|&k| k != pos)
            .expect("two parameters");
        alpha[other] += removed;
    }
    alpha
}

/// A start on `f_i = 0`: `base` with the solving momentum replaced.
pub fn divisor_start(
    sys: &HamiltonianSystem,
    entry: &DivisorEntry,
    base: &NumericState,
) -> Result<NumericState> {
    let p = entry
        .solving_momentum()
        .ok_or_else(|| Error::InvalidInput(format!("f{} has no solving momentum", entry.index)))?;
    let alpha = divisor_alpha(sys, entry, &base.alpha);
    let assign: Vec<(usize, BigRational)> = sys
        .params()
        .into_iter()
        .zip(alpha.iter().cloned())
        .collect();
    let parts = entry.divisor.eval_at(&assign).split_by(p);
    let (rest, lead) = (CompiledPoly::new(&parts[0]), CompiledPoly::new(&parts[1]));
    let cs = CompiledSystem::new(sys, &alpha)?;
    let v = cs.values(base.t, &base.vars);
    let mut vars = base.vars.clone();
    let k = sys
        .registry
        .dynamical()
        .iter()
        .position(|&s| s == p)
        .expect("dynamical");
    vars[k] = -div(rest.eval(&v), lead.eval(&v));
    Ok(NumericState {
        t: base.t,
        vars,
        alpha,
    })
}

/// Maximum of |f_i| along the trajectory from a start on `f_i = 0` with
/// `alpha_i = 0`. Inconclusive when a pole cuts the run short.
pub fn check_divisor_drift(
    sys: &HamiltonianSystem,
    entry: &DivisorEntry,
    base: &NumericState,
    t_end: TwoFloat,
    cfg: &IntegratorConfig,
) -> Result<VerificationReport> {
    let start = Instant::now();
    let s0 = divisor_start(sys, entry, base)?;
    let traj = integrate(sys, &s0, t_end, cfg)?;
    let cs = CompiledSystem::new(sys, &s0.alpha)?;
    let i = divisor_table(sys)
        .iter()
        .position(|d| d.index == entry.index)
        .expect("table entry");
    let drift = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(t, y)| to_f64(cs.divisor(i, *t, y)).abs())
        .fold(0.0, f64::max);
    let mut r = VerificationReport::new("divisor-drift", &sys.label, &format!("f{}", entry.index));
    r.put("alpha", alpha_text(sys, &s0.alpha))
        .put("start_state", state_text(sys, &s0.vars))
        .put("max_abs_divisor", drift)
        .put("tolerance", DRIFT_TOLERANCE);
    put_truncation(&mut r, sys, &traj);
    let status = if drift > DRIFT_TOLERANCE {
        Status::Fail
    } else if traj.completed() {
        Status::Pass
    } else {
        Status::Inconclusive
    };
    Ok(r.with_status(status).timed(start))
}

/// Endpoints at `tol` and `tol / 2` differ by less than ten times the tighter
/// tolerance (relative to the endpoint size when it exceeds one).
pub fn check_tolerance_halving(
    sys: &HamiltonianSystem,
    state0: &NumericState,
    t_end: TwoFloat,
    tol: f64,
) -> Result<VerificationReport> {
    let start = Instant::now();
    let coarse = integrate(sys, state0, t_end, &IntegratorConfig::with_tolerance(tol))?;
    let fine = integrate(
        sys,
        state0,
        t_end,
        &IntegratorConfig::with_tolerance(tol / 2.0),
    )?;
    let mut r = VerificationReport::new("tolerance-halving", &sys.label, "endpoint");
    if !coarse.completed() || !fine.completed() {
        put_truncation(&mut r, sys, &fine);
        return Ok(r.with_status(Status::Inconclusive).timed(start));
    }
    let scale = fine
        .last()
        .1
        .iter()
        .map(|v| to_f64(*v).abs())
        .fold(1.0, f64::max);
    let diff = max_abs_diff(coarse.last().1, fine.last().1) / scale;
    let bound = 10.0 * tol / 2.0;
    r.put("tolerance", tol)
        .put("endpoint_difference", diff)
        .put("bound", bound);
    Ok(r.with_status(Status::from_bool(diff < bound)).timed(start))
}

/// Writes `t, variables, H, f_0.. f_n` per accepted step.
pub fn write_csv<W: Write>(
    sys: &HamiltonianSystem,
    alpha: &[BigRational],
    traj: &Trajectory,
    out: W,
) -> Result<()> {
    let cs = CompiledSystem::new(sys, alpha)?;
    let io = |e: csv::Error| Error::InvalidInput(format!("csv output: {e}"));
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend(
        sys.registry
            .dynamical()
            .into_iter()
            .map(|s| sys.registry.name(s).to_string()),
    );
    header.push("H".into());
    if sys.kind.is_some() {
        header.extend(divisor_table(sys).iter().map(|d| format!("f{}", d.index)));
    }
    w.write_record(&header).map_err(io)?;
    for (t, y) in traj.times.iter().zip(&traj.states) {
        let mut row = vec![fmt_tf(*t)];
        row.extend(y.iter().map(|v| fmt_tf(*v)));
        row.push(fmt_tf(cs.hamiltonian(*t, y)));
        row.extend((0..cs.num_divisors()).map(|i| fmt_tf(cs.divisor(i, *t, y))));
        w.write_record(&row).map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::InvalidInput(format!("csv output: {e}")))?;
    Ok(())
}

/// Fixed starting data for the numeric checks.
pub mod presets {
    use super::*;

    fn rats(v: &[(i64, i64)]) -> Vec<BigRational> {
        v.iter().map(|&(n, d)| rat(n, d)).collect()
    }

    /// End of the non-conservation witness interval. The witness start runs
    /// into a movable pole near t = 0.4987, so [0, 1] cannot be integrated.
    pub const WITNESS_T_END: f64 = 0.25;

    /// End of the divisor drift interval. Starts on f0 = 0 and d5's f4 = 0
    /// meet poles between t = 0.88 and t = 0.98.
    pub const DRIFT_T_END: f64 = 0.5;

    /// Non-conservation witness: unit coordinates, zero momenta.
    pub fn witness(sys: &HamiltonianSystem) -> Result<NumericState> {
        let (vars, alpha) = match sys.kind {
            Some(SystemKind::D3) => (
                rats(&[(1, 1), (0, 1), (1, 1), (0, 1)]),
                rats(&[(1, 4), (1, 8)]),
            ),
            Some(SystemKind::D5) => (
                rats(&[
                    (1, 1),
                    (0, 1),
                    (1, 1),
                    (0, 1),
                    (1, 1),
                    (0, 1),
                    (1, 1),
                    (0, 1),
                ]),
                rats(&[(1, 4), (1, 8), (1, 4), (1, 8)]),
            ),
            None => return Err(Error::InvalidInput("no witness for this system".into())),
        };
        let alpha = complete_alpha(sys, &alpha)?;
        Ok(NumericState::from_rationals(
            &BigRational::zero(),
            &vars,
            &alpha,
        ))
    }

    /// A start away from every divisor and indeterminacy locus.
    pub fn generic(sys: &HamiltonianSystem) -> Result<NumericState> {
        let (vars, alpha) = match sys.kind {
            Some(SystemKind::D3) => (
                rats(&[(3, 10), (-1, 5), (2, 7), (1, 9)]),
                rats(&[(3, 10), (1, 7)]),
            ),
            Some(SystemKind::D5) => (
                rats(&[
                    (3, 10),
                    (-1, 5),
                    (2, 7),
                    (1, 9),
                    (-1, 4),
                    (1, 6),
                    (2, 11),
                    (-1, 8),
                ]),
                rats(&[(3, 10), (1, 7), (2, 9), (1, 11)]),
            ),
            None => {
                return Err(Error::InvalidInput(
                    "no generic start for this system".into(),
                ))
            }
        };
        // the completed parameter is the highest one; move it into place for D5
        let alpha = match sys.kind {
            Some(SystemKind::D5) => {
                let full = complete_alpha(sys, &alpha)?;
                vec![
                    full[0].clone(),
                    full[1].clone(),
                    full[4].clone(),
                    full[2].clone(),
                    full[3].clone(),
                ]
            }
            _ => complete_alpha(sys, &alpha)?,
        };
        Ok(NumericState::from_rationals(
            &BigRational::zero(),
            &vars,
            &alpha,
        ))
    }

    /// The autonomous subsystem control: (z, w) = (1, 1), alpha1 = 1/2.
    pub fn auto_control() -> (HamiltonianSystem, NumericState) {
        let sys = build_auto_subsystem();
        let s = NumericState::from_rationals(
            &BigRational::zero(),
            &rats(&[(1, 1), (1, 1)]),
            &rats(&[(1, 2)]),
        );
        (sys, s)
    }
}
