//! Invariant divisors, their cofactor certificates, reductions onto the
//! invariant manifolds, and the birational change of variables that
//! straightens the third divisor of the four-dimensional system.

mod integrals;

pub use integrals::{first_integral_search, integral_report, IntegralSearch};

use num_rational::BigRational;
use num_traits::Zero;

use crate::algebra::linear_elim::{linear_parts, reduce_linear};
use crate::algebra::{fmt_rational, Monomial, MultiPoly, RatFunc, Substitution};
use crate::error::{Error, Result};
use crate::report::{Status, VerificationReport};
use crate::systems::{poisson_bracket, HamiltonianSystem, SystemKind};

/// `{f = 0}` is invariant under the flow when `alpha = 0`.
#[derive(Debug, Clone)]
pub struct DivisorEntry {
    pub system: SystemKind,
    pub index: usize,
    /// Registry index of the parameter.
    pub alpha: usize,
    pub divisor: MultiPoly,
}

impl DivisorEntry {
    pub fn alpha_name(&self) -> String {
        format!("alpha{}", self.index)
    }

    /// A momentum in which the divisor has degree one with constant leading
    /// coefficient (the variable the divisor is solved for).
    pub fn solving_momentum(&self) -> Option<usize> {
        let reg = self.divisor.registry();
        reg.pairs().iter().map(|&(_, p)| p).find(|&p| {
            let parts = self.divisor.split_by(p);
            parts.len() == 2 && parts[1].is_constant() && !parts[1].is_zero()
        })
    }
}

const D3_DIVISORS: [&str; 3] = ["p1 + q2^2/4", "p2", "p1 + 2*p2 + t + q1*q2 - q2^2/4"];

const D5_DIVISORS: [&str; 5] = [
    "p1 + q2^2/4",
    "p2",
    "p2 + (p1 + p4)/2 + p3 + t + q1*q2/2 + q3*q4/2 - q2*q3/4",
    "p3",
    "p4 + q3^2/4",
];

pub fn divisor_table(sys: &HamiltonianSystem) -> Vec<DivisorEntry> {
    let kind = sys.kind.expect("divisor tables exist for d3 and d5 only");
    let src: &[&str] = match kind {
        SystemKind::D3 => &D3_DIVISORS,
        SystemKind::D5 => &D5_DIVISORS,
    };
    src.iter()
        .enumerate()
        .map(|(i, s)| DivisorEntry {
            system: kind,
            index: i,
            alpha: sys
                .registry
                .index_of(&format!("alpha{i}"))
                .expect("parameter"),
            divisor: sys.poly(s).expect("static divisor"),
        })
        .collect()
}

/// `flow_derivative(f) = cofactor * f + k * alpha`, exactly, after the
/// normalization is imposed iff `requires_relation`.
#[derive(Debug, Clone)]
pub struct CofactorCertificate {
    pub entry: DivisorEntry,
    pub cofactor: MultiPoly,
    pub k: BigRational,
    pub requires_relation: bool,
    /// Remainder of the derivative modulo the divisor, before any rewrite.
    pub raw_remainder: MultiPoly,
}

impl CofactorCertificate {
    /// Re-checks the identity from scratch.
    pub fn holds(&self, sys: &HamiltonianSystem) -> Result<bool> {
        let f = &self.entry.divisor;
        let mut lhs = sys.flow_derivative(f)?;
        let alpha = MultiPoly::var_idx(f.registry(), self.entry.alpha);
        let mut rhs = self
            .cofactor
            .checked_mul(f)?
            .checked_add(&alpha.scale(&self.k))?;
        if self.requires_relation {
            let j = relation_index_for(sys, self.entry.alpha)?;
            lhs = sys.impose_relation_on(&lhs, j)?;
            rhs = sys.impose_relation_on(&rhs, j)?;
        }
        Ok(lhs == rhs)
    }

    pub fn to_report(&self) -> VerificationReport {
        let e = &self.entry;
        let mut r = VerificationReport::new("divisor", e.system.label(), &format!("f{}", e.index));
        r.put("divisor", e.divisor.to_string())
            .put("alpha", e.alpha_name())
            .put("cofactor", self.cofactor.to_string())
            .put("k", fmt_rational(&self.k))
            .put("requires_relation", self.requires_relation)
            .put("raw_remainder", self.raw_remainder.to_string());
        r.with_status(Status::Pass)
    }
}

/// The parameter eliminated when the normalization is used to bring a
/// remainder into the form `k * alpha_i`: the highest-index parameter other
/// than `alpha_i`.
fn relation_index_for(sys: &HamiltonianSystem, alpha: usize) -> Result<usize> {
    sys.params()
        .into_iter()
        .rev()
        .find(|&a| a != alpha)
        .ok_or_else(|| Error::InvalidInput("no parameter to eliminate".into()))
}

/// `Some(k)` when `r == k * alpha`.
fn alpha_multiple(r: &MultiPoly, alpha: usize) -> Option<BigRational> {
    if r.is_zero() {
        return Some(BigRational::zero());
    }
    let m = Monomial::var(r.registry().len(), alpha, 1);
    let k = r.coeff(&m);
    if r.num_terms() == 1 && !k.is_zero() {
        Some(k)
    } else {
        None
    }
}

/// Splits the flow derivative of `f_i` into a multiple of `f_i` plus a
/// remainder and checks that the remainder is a constant multiple of
/// `alpha_i`, trying again under the normalization before giving up.
pub fn certify_divisor(
    sys: &HamiltonianSystem,
    entry: &DivisorEntry,
) -> Result<CofactorCertificate> {
    let f = &entry.divisor;
    let v = entry.solving_momentum().ok_or_else(|| Error::NotLinear {
        poly: f.to_string(),
        var: "any momentum".into(),
    })?;
    let fdot = sys.flow_derivative(f)?;
    let remainder = reduce_linear(&fdot, f, v)?;
    let cofactor = fdot.checked_sub(&remainder)?.try_div(f)?.ok_or_else(|| {
        Error::Verification(format!(
            "f{} does not divide its derivative minus the remainder",
            entry.index
        ))
    })?;
    let cert = |k, requires_relation, cofactor| CofactorCertificate {
        entry: entry.clone(),
        cofactor,
        k,
        requires_relation,
        raw_remainder: remainder.clone(),
    };
    if let Some(k) = alpha_multiple(&remainder, entry.alpha) {
        return Ok(cert(k, false, cofactor));
    }
    if sys.normalization.is_some() {
        let j = relation_index_for(sys, entry.alpha)?;
        let r = sys.impose_relation_on(&remainder, j)?;
        if let Some(k) = alpha_multiple(&r, entry.alpha) {
            let c = sys.impose_relation_on(&cofactor, j)?;
            return Ok(cert(k, true, c));
        }
    }
    Err(Error::Verification(format!(
        "remainder of f{} is not a multiple of {}: {remainder}",
        entry.index,
        entry.alpha_name()
    )))
}

pub fn certify_all(sys: &HamiltonianSystem) -> Result<Vec<CofactorCertificate>> {
    divisor_table(sys)
        .iter()
        .map(|e| certify_divisor(sys, e))
        .collect()
}

/// One restriction `alpha = 0, f = 0`; `f` must be solvable for a momentum.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub alpha: usize,
    pub f: MultiPoly,
}

impl Constraint {
    pub fn parse(sys: &HamiltonianSystem, alpha: &str, f: &str) -> Result<Self> {
        Ok(Constraint {
            alpha: sys.registry.index_of(alpha)?,
            f: sys.poly(f)?,
        })
    }
}

/// Right-hand sides of the flow restricted to an invariant manifold, over the
/// variables that were not eliminated.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub variables: Vec<usize>,
    pub rhs: Vec<MultiPoly>,
    pub eliminated: Vec<(usize, MultiPoly)>,
}

impl ReducedSystem {
    pub fn equation(&self, var: usize) -> Option<&MultiPoly> {
        self.variables
            .iter()
            .position(|&v| v == var)
            .map(|k| &self.rhs[k])
    }

    pub fn lines(&self) -> Vec<String> {
        self.variables
            .iter()
            .zip(&self.rhs)
            .map(|(&v, r)| {
                let name = r.registry().name(v);
                format!("d{name}/dt = {r}")
            })
            .collect()
    }
}

/// Restricts the flow to `{alpha_i = 0, f_i = 0}` for each constraint in
/// turn. Every `f` is solved for a momentum, which is then substituted; the
/// derivative of each `f` must vanish on the resulting manifold.
pub fn reduce_on_divisor(
    sys: &HamiltonianSystem,
    constraints: &[Constraint],
) -> Result<ReducedSystem> {
    let reg = &sys.registry;
    let vf = sys.vector_field();
    let mut variables = sys.dynamical();
    let mut rhs: Vec<MultiPoly> = vf
        .components
        .iter()
        .map(|c| c.to_poly().map(|p| p.expect("polynomial vector field")))
        .collect::<Result<_>>()?;
    let mut zeroed: Vec<(usize, BigRational)> = Vec::new();
    let mut eliminated: Vec<(usize, MultiPoly)> = Vec::new();
    let mut derivatives: Vec<MultiPoly> = Vec::new();
    for c in constraints {
        zeroed.push((c.alpha, BigRational::zero()));
        let f = restrict(&c.f.eval_at(&zeroed), &eliminated)?;
        let v = reg
            .pairs()
            .iter()
            .map(|&(_, p)| p)
            .find(|&p| {
                variables.contains(&p) && {
                    let parts = f.split_by(p);
                    parts.len() == 2 && parts[1].is_constant() && !parts[1].is_zero()
                }
            })
            .ok_or_else(|| {
                Error::Inconsistent(format!("{} cannot be solved for a remaining momentum", c.f))
            })?;
        let (a, b) = linear_parts(&f, v)?;
        let root = (-&b).scale(&a.constant_value().expect("constant").recip());
        for (_, img) in eliminated.iter_mut() {
            *img = img.compose_var(v, &root)?;
        }
        eliminated.push((v, root));
        let k = variables
            .iter()
            .position(|&x| x == v)
            .expect("remaining momentum");
        variables.remove(k);
        rhs.remove(k);
        derivatives.push(sys.flow_derivative(&c.f)?);
        for r in rhs.iter_mut() {
            *r = restrict(&r.eval_at(&zeroed), &eliminated)?;
        }
    }
    for (c, d) in constraints.iter().zip(&derivatives) {
        let on_manifold = restrict(&d.eval_at(&zeroed), &eliminated)?;
        if !on_manifold.is_zero() {
            return Err(Error::Inconsistent(format!(
                "{} = 0 is not invariant on the restricted manifold: derivative {on_manifold}",
                c.f
            )));
        }
    }
    Ok(ReducedSystem {
        variables,
        rhs,
        eliminated,
    })
}

fn restrict(p: &MultiPoly, eliminated: &[(usize, MultiPoly)]) -> Result<MultiPoly> {
    let mut out = p.clone();
    for (v, img) in eliminated {
        out = out.compose_var(*v, img)?;
    }
    Ok(out)
}

/// The change of variables `x2 = q1, y2 = f2, z2 = q2 - 2 q1,
/// w2 = p2 + q1^2/2 - q2^2/8` of the four-dimensional system, with its
/// inverse written over the same symbols in the order (x2, y2, z2, w2) ->
/// (q1, p1, q2, p2).
pub const EQ13_FORWARD: [(&str, &str); 4] = [
    ("x2", "q1"),
    ("y2", "p1 + 2*p2 + t + q1*q2 - q2^2/4"),
    ("z2", "q2 - 2*q1"),
    ("w2", "p2 + q1^2/2 - q2^2/8"),
];

const EQ13_INVERSE: [(&str, &str); 4] = [
    ("q1", "q1"),
    ("p1", "p1 - 2*p2 - t - q1^2 - q1*q2"),
    ("q2", "q2 + 2*q1"),
    ("p2", "p2 - q1^2/2 + (q2 + 2*q1)^2/8"),
];

/// Printed reduced systems: on `p2 = 0` with `alpha1 = 0`, and additionally
/// on `p1 = 0` with `alpha0 = 0`.
const RICCATI_LINES: [&str; 3] = [
    "dq1/dt = 2*q1^2 + 4*p1 + 2*t",
    "dp1/dt = -4*q1*p1 - 2*alpha0",
    "dq2/dt = q2^2 + 4*p1 - 2*q1*q2",
];
const AIRY_LINES: [&str; 2] = ["dq1/dt = 2*q1^2 + 2*t", "dq2/dt = q2^2 - 2*q1*q2"];

/// Both reductions of D3, compared with the printed systems term by term.
pub fn verify_reductions(sys: &HamiltonianSystem) -> Result<Vec<VerificationReport>> {
    if sys.kind != Some(SystemKind::D3) {
        return Err(Error::InvalidInput(
            "the reductions are stated for d3".into(),
        ));
    }
    let cases: [(&str, Vec<Constraint>, &[&str]); 2] = [
        (
            "riccati",
            vec![Constraint::parse(sys, "alpha1", "p2")?],
            &RICCATI_LINES,
        ),
        (
            "airy",
            vec![
                Constraint::parse(sys, "alpha1", "p2")?,
                Constraint::parse(sys, "alpha0", "p1")?,
            ],
            &AIRY_LINES,
        ),
    ];
    let mut out = Vec::new();
    for (label, cs, printed) in cases {
        let start = std::time::Instant::now();
        let red = reduce_on_divisor(sys, &cs)?;
        let mut ok = red.rhs.len() == printed.len();
        for (rhs, line) in red.rhs.iter().zip(printed) {
            let (_, text) = line.split_once(" = ").expect("printed line");
            ok &= *rhs == sys.poly(text)?;
        }
        let mut r = VerificationReport::new("reduction", &sys.label, label);
        r.put(
            "equations",
            serde_json::to_value(red.lines()).expect("json"),
        );
        out.push(r.with_status(Status::from_bool(ok)).timed(start));
    }
    Ok(out)
}

/// Checks that the straightening map is symplectic and birational, that its
/// second component is the third invariant divisor, and that its derivative
/// vanishes on `{alpha2 = 0, y2 = 0}` under the normalization.
pub fn verify_straightening(sys: &HamiltonianSystem) -> Result<VerificationReport> {
    if sys.kind != Some(SystemKind::D3) {
        return Err(Error::InvalidInput(
            "the straightening map belongs to d3".into(),
        ));
    }
    let mut report = VerificationReport::new("eq13", "d3", "x2,y2,z2,w2");
    let reg = &sys.registry;
    let fwd: Vec<MultiPoly> = EQ13_FORWARD
        .iter()
        .map(|(_, s)| sys.poly(s))
        .collect::<Result<_>>()?;
    let (x, y, z, w) = (&fwd[0], &fwd[1], &fwd[2], &fwd[3]);

    let expected = [
        ("{y2,x2}", y, x, 1),
        ("{w2,z2}", w, z, 1),
        ("{x2,z2}", x, z, 0),
        ("{x2,w2}", x, w, 0),
        ("{y2,z2}", y, z, 0),
        ("{y2,w2}", y, w, 0),
    ];
    let mut symplectic = true;
    let mut brackets = serde_json::Map::new();
    for (label, a, b, want) in expected {
        let br = poisson_bracket(a, b)?;
        symplectic &= br == MultiPoly::constant(reg, BigRational::from_integer(want.into()));
        brackets.insert(label.into(), br.to_string().into());
    }

    let idx = |n: &str| reg.index_of(n);
    let fwd_sub = Substitution::new(
        reg,
        reg,
        [
            (idx("q1")?, RatFunc::from_poly(x.clone())),
            (idx("p1")?, RatFunc::from_poly(y.clone())),
            (idx("q2")?, RatFunc::from_poly(z.clone())),
            (idx("p2")?, RatFunc::from_poly(w.clone())),
        ],
    )?;
    let inv: Vec<(usize, RatFunc)> = EQ13_INVERSE
        .iter()
        .map(|(v, s)| Ok((idx(v)?, sys.ratfunc(s)?)))
        .collect::<Result<_>>()?;
    let inv_sub = Substitution::new(reg, reg, inv)?;
    let mut birational = true;
    for v in sys.dynamical() {
        let var = RatFunc::from_poly(MultiPoly::var_idx(reg, v));
        // forward then inverse, and inverse then forward
        let a = fwd_sub.apply(&inv_sub.apply(&var)?)?;
        let b = inv_sub.apply(&fwd_sub.apply(&var)?)?;
        birational &= a.equals(&var)? && b.equals(&var)?;
    }

    let f2 = &divisor_table(sys)[2].divisor;
    let y_is_f2 = y == f2;

    let a1 = idx("alpha1")?;
    let a2 = idx("alpha2")?;
    let ydot = sys.impose_relation_on(&sys.flow_derivative(y)?, a1)?;
    let zero = BigRational::zero();
    let on_manifold = reduce_linear(&ydot.eval_at(&[(a2, zero)]), y, idx("p1")?)?;
    let invariant = on_manifold.is_zero();

    report
        .put("symplectic", symplectic)
        .put("brackets", serde_json::Value::Object(brackets))
        .put("birational", birational)
        .put("y2_equals_f2", y_is_f2)
        .put("y2_dot", ydot.to_string())
        .put("y2_dot_on_manifold", on_manifold.to_string());
    Ok(report.with_status(Status::from_bool(
        symplectic && birational && y_is_f2 && invariant,
    )))
}
