//! Dormand–Prince 5(4) with adaptive step control, in double-double arithmetic.

use twofloat::TwoFloat;

use super::compiled::{is_finite, q, tf, to_f64};

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub max_steps: usize,
    /// Significand bits of the working precision (fixed by the float type).
    pub precision_bits: u32,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rtol: 1e-12,
            atol: 1e-12,
            max_step: 0.05,
            max_steps: 200_000,
            precision_bits: PRECISION_BITS,
        }
    }
}

pub const PRECISION_BITS: u32 = 106;

impl IntegratorConfig {
    pub fn with_tolerance(tol: f64) -> Self {
        IntegratorConfig {
            rtol: tol,
            atol: tol,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err("tolerances must be positive".into());
        }
        if !(self.max_step > 0.0) || self.max_steps == 0 {
            return Err("max step and max steps must be positive".into());
        }
        if self.precision_bits != PRECISION_BITS {
            return Err(format!("only {PRECISION_BITS}-bit precision is available"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StopReason {
    StepUnderflow,
    MaxSteps,
    NonFinite,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::StepUnderflow => "step size underflow",
            StopReason::MaxSteps => "step count exceeded",
            StopReason::NonFinite => "non-finite right-hand side",
        }
    }
}

/// Accepted points of an integration. `stopped` is set when the run ended
/// before `t_end`; the last point is then the last good state.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<TwoFloat>,
    pub states: Vec<Vec<TwoFloat>>,
    pub stopped: Option<StopReason>,
    pub rejected: usize,
}

impl Trajectory {
    pub fn last(&self) -> (TwoFloat, &[TwoFloat]) {
        (*self.times.last().unwrap(), self.states.last().unwrap())
    }

    pub fn completed(&self) -> bool {
        self.stopped.is_none()
    }
}

struct Tableau {
    c: [TwoFloat; 7],
    a: [[TwoFloat; 6]; 7],
    b: [TwoFloat; 7],
    e: [TwoFloat; 7],
}

fn tableau() -> Tableau {
    let z = tf(0.0);
    let b = [
        q(35, 384),
        z,
        q(500, 1113),
        q(125, 192),
        q(-2187, 6784),
        q(11, 84),
        z,
    ];
    let b_star = [
        q(5179, 57600),
        z,
        q(7571, 16695),
        q(393, 640),
        q(-92097, 339200),
        q(187, 2100),
        q(1, 40),
    ];
    let mut e = [z; 7];
    for i in 0..7 {
        e[i] = b[i] - b_star[i];
    }
    Tableau {
        c: [z, q(1, 5), q(3, 10), q(4, 5), q(8, 9), tf(1.0), tf(1.0)],
        a: [
            [z; 6],
            [q(1, 5), z, z, z, z, z],
            [q(3, 40), q(9, 40), z, z, z, z],
            [q(44, 45), q(-56, 15), q(32, 9), z, z, z],
            [
                q(19372, 6561),
                q(-25360, 2187),
                q(64448, 6561),
                q(-212, 729),
                z,
                z,
            ],
            [
                q(9017, 3168),
                q(-355, 33),
                q(46732, 5247),
                q(49, 176),
                q(-5103, 18656),
                z,
            ],
            b[..6].try_into().unwrap(),
        ],
        b,
        e,
    }
}

/// Integrates `y' = f(t, y)` from `(t0, y0)` to `t_end` (either direction).
/// `f` returns `None` when the right-hand side cannot be evaluated.
pub fn integrate_fn<F>(
    f: F,
    t0: TwoFloat,
    y0: &[TwoFloat],
    t_end: TwoFloat,
    cfg: &IntegratorConfig,
) -> Trajectory
where
    F: Fn(TwoFloat, &[TwoFloat]) -> Option<Vec<TwoFloat>>,
{
    let mut traj = Trajectory {
        times: vec![t0],
        states: vec![y0.to_vec()],
        stopped: None,
        rejected: 0,
    };
    let span = to_f64(t_end - t0);
    if span == 0.0 {
        return traj;
    }
    let dir = span.signum();
    let tab = tableau();
    let n = y0.len();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut h = (span.abs() * 1e-3).min(cfg.max_step);
    let Some(mut k1) = f(t, &y) else {
        traj.stopped = Some(StopReason::NonFinite);
        return traj;
    };
    let mut steps = 0usize;
    loop {
        let remaining = to_f64(t_end - t) * dir;
        if remaining <= 0.0 {
            break;
        }
        if steps >= cfg.max_steps {
            traj.stopped = Some(StopReason::MaxSteps);
            break;
        }
        let last = h >= remaining;
        let step = if last { t_end - t } else { tf(h * dir) };
        if h < 1e-14 * (1.0 + to_f64(t).abs()) {
            traj.stopped = Some(StopReason::StepUnderflow);
            break;
        }
        steps += 1;

        let mut k: Vec<Vec<TwoFloat>> = vec![k1.clone()];
        let mut ok = true;
        for s in 1..7 {
            let ys: Vec<TwoFloat> = (0..n)
                .map(|i| {
                    let mut acc = tf(0.0);
                    for (j, kj) in k.iter().enumerate() {
                        acc += tab.a[s][j] * kj[i];
                    }
                    y[i] + step * acc
                })
                .collect();
            match f(t + tab.c[s] * step, &ys) {
                Some(ks) if ks.iter().all(|v| is_finite(*v)) => k.push(ks),
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        let (y_new, err) = if ok {
            let mut y_new = vec![tf(0.0); n];
            let mut err = 0.0f64;
            for i in 0..n {
                let mut acc = tf(0.0);
                let mut e = tf(0.0);
                for s in 0..7 {
                    acc += tab.b[s] * k[s][i];
                    e += tab.e[s] * k[s][i];
                }
                y_new[i] = y[i] + step * acc;
                let scale = cfg.atol + cfg.rtol * to_f64(y[i]).abs().max(to_f64(y_new[i]).abs());
                err = err.max(to_f64(step * e).abs() / scale);
            }
            (y_new, if err.is_finite() { err } else { f64::INFINITY })
        } else {
            (Vec::new(), f64::INFINITY)
        };

        if err <= 1.0 {
            t = if last { t_end } else { t + step };
            y = y_new;
            k1 = k.swap_remove(6);
            traj.times.push(t);
            traj.states.push(y.clone());
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if !last {
                h = (h * factor).min(cfg.max_step);
            }
        } else {
            traj.rejected += 1;
            let factor = if err.is_finite() {
                (0.9 * err.powf(-0.2)).clamp(0.1, 0.9)
            } else {
                0.25
            };
            h *= factor;
        }
    }
    traj
}
