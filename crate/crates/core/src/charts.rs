//! Coordinate charts in which the systems stay polynomial Hamiltonian, the
//! pushforward of the flow into them and recovery of the new Hamiltonian.

use std::sync::Arc;

use crate::algebra::{parse_ratfunc, MultiPoly, RatFunc, Substitution, VarRegistry};
use crate::error::{Error, Result};
use crate::report::{clip, Status, VerificationReport};
use crate::systems::{poisson_bracket_rf, HamiltonianSystem, SystemKind, VectorField};
use num_rational::BigRational;

/// Text of one chart: new variables (coordinate/momentum pairs in order),
/// forward images in the old variables, inverse images in the new ones,
/// the correction term and the variable whose inverse is the pole.
struct ChartSpec {
    name: &'static str,
    forward: &'static [&'static str],
    inverse: &'static [&'static str],
    correction: &'static str,
    inverted: &'static str,
}

const D3_NAMES: [&str; 4] = ["x", "y", "z", "w"];
const D5_NAMES: [&str; 8] = ["x", "y", "z", "w", "l", "m", "n", "u"];

// Inverse images use the new names with the chart index stripped; they are
// renamed when the chart is built.
const D3_CHARTS: &[ChartSpec] = &[
    ChartSpec {
        name: "r0",
        forward: &[
            "1/q1",
            "-((p1 + q2^2/4)*q1 + alpha0)*q1",
            "q2",
            "p2 + q1*q2/2",
        ],
        inverse: &["1/x", "-x^2*y - alpha0*x - z^2/4", "z", "w - z/(2*x)"],
        correction: "0",
        inverted: "x",
    },
    ChartSpec {
        name: "r1",
        forward: &["q1", "p1", "1/q2", "-(q2*p2 + alpha1)*q2"],
        inverse: &["x", "y", "1/z", "-(w*z + alpha1)*z"],
        correction: "0",
        inverted: "z",
    },
    ChartSpec {
        name: "r2",
        forward: &[
            "1/q1",
            "-((p1 + 2*p2 + t + q1*q2 - q2^2/4)*q1 + alpha2)*q1",
            "q2 - 2*q1",
            "p2 + q1^2/2 - q2^2/8",
        ],
        inverse: &[
            "1/x",
            "-x^2*y - alpha2*x - 2*w - t - z/x - 1/x^2",
            "z + 2/x",
            "w + z^2/8 + z/(2*x)",
        ],
        correction: "q1",
        inverted: "x",
    },
];

const D5_CHARTS: &[ChartSpec] = &[
    ChartSpec {
        name: "r0",
        forward: &[
            "1/q1",
            "-((p1 + q2^2/4)*q1 + alpha0)*q1",
            "q2",
            "p2 + q1*q2/2",
            "q3",
            "p3",
            "q4",
            "p4",
        ],
        inverse: &[
            "1/x",
            "-x^2*y - alpha0*x - z^2/4",
            "z",
            "w - z/(2*x)",
            "l",
            "m",
            "n",
            "u",
        ],
        correction: "0",
        inverted: "x",
    },
    ChartSpec {
        name: "r1",
        forward: &[
            "q1",
            "p1",
            "1/q2",
            "-(q2*p2 + alpha1)*q2",
            "q3",
            "p3",
            "q4",
            "p4",
        ],
        inverse: &["x", "y", "1/z", "-(w*z + alpha1)*z", "l", "m", "n", "u"],
        correction: "0",
        inverted: "z",
    },
    ChartSpec {
        name: "r2",
        forward: &[
            "q1 - q2/2",
            "p1 + q2^2/4",
            "1/q2",
            "-((p2 + (p1 + p4)/2 + p3 + t + q1*q2/2 + q3*q4/2 - q2*q3/4)*q2 + alpha2)*q2",
            "q3 - q2",
            "p3 - q2^2/4 + q2*q4/2",
            "q4 - q2/2",
            "p4 + q2*q3/2 - q2^2/4",
        ],
        inverse: &[
            "x + 1/(2*z)",
            "y - 1/(4*z^2)",
            "1/z",
            "-z^2*w - alpha2*z - (y + u)/2 - m - t - x/(2*z) - l*n/2 + l/(4*z)",
            "l + 1/z",
            "m - n/(2*z)",
            "n + 1/(2*z)",
            "u - l/(2*z) - 1/(4*z^2)",
        ],
        correction: "q2",
        inverted: "z",
    },
    ChartSpec {
        name: "r3",
        forward: &[
            "q1",
            "p1",
            "q2",
            "p2",
            "1/q3",
            "-(q3*p3 + alpha3)*q3",
            "q4",
            "p4",
        ],
        inverse: &["x", "y", "z", "w", "1/l", "-(m*l + alpha3)*l", "n", "u"],
        correction: "0",
        inverted: "l",
    },
    ChartSpec {
        name: "r4",
        forward: &[
            "q1",
            "p1",
            "q2",
            "p2",
            "q3",
            "p3 + q3*q4/2",
            "1/q4",
            "-((p4 + q3^2/4)*q4 + alpha4)*q4",
        ],
        inverse: &[
            "x",
            "y",
            "z",
            "w",
            "l",
            "m - l/(2*n)",
            "1/n",
            "-n^2*u - alpha4*n - l^2/4",
        ],
        correction: "0",
        inverted: "n",
    },
];

fn chart_specs(kind: SystemKind) -> &'static [ChartSpec] {
    match kind {
        SystemKind::D3 => D3_CHARTS,
        SystemKind::D5 => D5_CHARTS,
    }
}

pub fn chart_names(kind: SystemKind) -> Vec<&'static str> {
    chart_specs(kind).iter().map(|c| c.name).collect()
}

/// A symplectic change of variables `(q, p) -> (new)`, with `t` and the
/// parameters unchanged.
#[derive(Debug, Clone)]
pub struct Chart {
    pub label: String,
    /// Registry of the new variables; its dynamical order matches `forward`.
    pub registry: Arc<VarRegistry>,
    /// New variables as rational functions of the old ones.
    pub forward: Vec<RatFunc>,
    /// Old dynamical variables as rational functions of the new ones.
    pub inverse: Vec<RatFunc>,
    /// Subtracted from the old Hamiltonian before comparing with the new one.
    pub correction: MultiPoly,
    /// Registry index (in the new registry) of the variable `1/q`.
    pub inverted: usize,
}

fn chart_registry(sys: &HamiltonianSystem, names: &[String]) -> Result<Arc<VarRegistry>> {
    let old = &sys.registry;
    let mut b = VarRegistry::builder();
    for pair in names.chunks(2) {
        b = b.pair(&pair[0], &pair[1]);
    }
    if let Some(t) = old.time() {
        b = b.time(old.name(t));
    }
    for a in old.params() {
        b = b.param(old.name(a));
    }
    b.build()
}

impl Chart {
    /// Builds a chart from text. `new_names` are the new dynamical variables
    /// in pair order; `inverse` is written in them.
    pub fn from_text(
        sys: &HamiltonianSystem,
        label: &str,
        new_names: &[String],
        forward: &[&str],
        inverse: &[&str],
        correction: &str,
        inverted: &str,
    ) -> Result<Chart> {
        let old_dyn = sys.dynamical();
        if forward.len() != old_dyn.len()
            || inverse.len() != old_dyn.len()
            || new_names.len() != old_dyn.len()
        {
            return Err(Error::InvalidInput(format!(
                "chart {label} has the wrong number of components"
            )));
        }
        let registry = chart_registry(sys, new_names)?;
        Ok(Chart {
            label: label.to_string(),
            forward: forward
                .iter()
                .map(|s| sys.ratfunc(s))
                .collect::<Result<_>>()?,
            inverse: inverse
                .iter()
                .map(|s| parse_ratfunc(&registry, s))
                .collect::<Result<_>>()?,
            correction: sys.poly(correction)?,
            inverted: registry.index_of(inverted)?,
            registry,
        })
    }

    /// Old variables -> new: substitution from the old registry into the new.
    pub fn inverse_substitution(&self, sys: &HamiltonianSystem) -> Result<Substitution> {
        Substitution::new(
            &sys.registry,
            &self.registry,
            sys.dynamical()
                .into_iter()
                .zip(self.inverse.iter().cloned()),
        )
    }

    /// New variables -> old.
    pub fn forward_substitution(&self, sys: &HamiltonianSystem) -> Result<Substitution> {
        Substitution::new(
            &self.registry,
            &sys.registry,
            self.registry
                .dynamical()
                .into_iter()
                .zip(self.forward.iter().cloned()),
        )
    }

    /// Checks forward and inverse against each other in both directions.
    pub fn round_trip(&self, sys: &HamiltonianSystem) -> Result<bool> {
        let inv = self.inverse_substitution(sys)?;
        let fwd = self.forward_substitution(sys)?;
        for (k, v) in sys.dynamical().into_iter().enumerate() {
            let var = RatFunc::from_poly(MultiPoly::var_idx(&sys.registry, v));
            if !fwd.apply(&self.inverse[k])?.equals(&var)? {
                return Ok(false);
            }
        }
        for (k, v) in self.registry.dynamical().into_iter().enumerate() {
            let var = RatFunc::from_poly(MultiPoly::var_idx(&self.registry, v));
            if !inv.apply(&self.forward[k])?.equals(&var)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// All brackets among the new variables, in the old variables, compared
    /// with the canonical values.
    pub fn is_symplectic(&self) -> Result<bool> {
        let n = self.forward.len();
        for a in 0..n {
            for b in (a + 1)..n {
                let br = poisson_bracket_rf(&self.forward[b], &self.forward[a])?;
                // {momentum, coordinate} = 1 within a pair
                let want = if a % 2 == 0 && b == a + 1 { 1 } else { 0 };
                let reg = br.registry().clone();
                let target = RatFunc::constant(&reg, BigRational::from_integer(want.into()));
                if !br.equals(&target)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// The transcribed chart `name` of the system.
pub fn chart(sys: &HamiltonianSystem, name: &str) -> Result<Chart> {
    let kind = sys
        .kind
        .ok_or_else(|| Error::UnknownChart(name.to_string()))?;
    let spec = chart_specs(kind)
        .iter()
        .find(|c| c.name == name)
        .ok_or_else(|| Error::UnknownChart(name.to_string()))?;
    let suffix = &name[1..];
    let base: &[&str] = match kind {
        SystemKind::D3 => &D3_NAMES,
        SystemKind::D5 => &D5_NAMES,
    };
    let new_names: Vec<String> = base.iter().map(|b| format!("{b}{suffix}")).collect();
    let rename = |s: &str| -> String {
        // append the chart index to every single-letter new variable
        let mut out = String::new();
        let chars: Vec<char> = s.chars().collect();
        for (i, &c) in chars.iter().enumerate() {
            out.push(c);
            let standalone = base.iter().any(|b| b.starts_with(c))
                && (i == 0 || !chars[i - 1].is_alphanumeric())
                && chars.get(i + 1).is_none_or(|n| !n.is_alphanumeric());
            if standalone {
                out.push_str(suffix);
            }
        }
        out
    };
    let inverse: Vec<String> = spec.inverse.iter().map(|s| rename(s)).collect();
    let inverse: Vec<&str> = inverse.iter().map(|s| s.as_str()).collect();
    Chart::from_text(
        sys,
        name,
        &new_names,
        spec.forward,
        &inverse,
        spec.correction,
        &rename(spec.inverted),
    )
}

pub fn all_charts(sys: &HamiltonianSystem) -> Result<Vec<Chart>> {
    let kind = sys
        .kind
        .ok_or_else(|| Error::InvalidInput("charts exist for d3 and d5 only".into()))?;
    chart_names(kind)
        .into_iter()
        .map(|n| chart(sys, n))
        .collect()
}

/// The flow written in the chart's variables: the derivative of each new
/// variable along the flow, re-expressed through the inverse map.
pub fn pushforward(sys: &HamiltonianSystem, c: &Chart) -> Result<VectorField> {
    let inv = c.inverse_substitution(sys)?;
    let components = c
        .forward
        .iter()
        .map(|phi| inv.apply(&sys.flow_derivative_rf(phi)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(VectorField {
        registry: c.registry.clone(),
        vars: c.registry.dynamical(),
        components,
    })
}

/// `K` with `Xdot = dK/dY`, `Ydot = -dK/dX`, obtained by integrating the
/// one-form `sum (Xdot dY - Ydot dX)` along rays from the origin (so `K`
/// vanishes there for every `t`).
pub fn integrate_hamiltonian(reg: &Arc<VarRegistry>, comps: &[MultiPoly]) -> MultiPoly {
    let dyn_vars = reg.dynamical();
    let mut k = MultiPoly::zero(reg);
    for (j, &(x, y)) in reg.pairs().iter().enumerate() {
        let xdot = &comps[2 * j];
        let ydot = &comps[2 * j + 1];
        for (coef, poly, var) in [(1, xdot, y), (-1, ydot, x)] {
            for (m, c) in poly.terms() {
                let d: u32 = dyn_vars.iter().map(|&v| m.exp(v)).sum();
                let scale = BigRational::new(coef.into(), (d + 1).into());
                let mono = m.with_exp(var, m.exp(var) + 1);
                k = &k + &MultiPoly::monomial(reg, mono, c * &scale);
            }
        }
    }
    k
}

/// Checks that a pushed-forward field is polynomial and Hamiltonian, recovers
/// `K` and compares it with the transformed Hamiltonian minus the chart's
/// correction term.
pub fn check_polynomial_hamiltonian(
    sys: &HamiltonianSystem,
    vf: &VectorField,
    c: &Chart,
    impose_relation: bool,
) -> Result<VerificationReport> {
    let mut report = VerificationReport::new("holomorphy", &sys.label, &c.label);
    report.put("impose_relation", impose_relation);
    let reg = &c.registry;
    let rel = if impose_relation {
        Some(chart_relation(sys, c)?)
    } else {
        None
    };
    let vf = match &rel {
        Some(r) => VectorField {
            components: vf
                .components
                .iter()
                .map(|x| r.apply(x))
                .collect::<Result<_>>()?,
            ..vf.clone()
        },
        None => vf.clone(),
    };
    let mut polys = Vec::new();
    let mut non_poly = Vec::new();
    for (v, comp) in vf.vars.iter().zip(&vf.components) {
        match comp.to_poly()? {
            Some(p) => polys.push(p),
            None => non_poly.push(format!(
                "d{}/dt = {}",
                reg.name(*v),
                clip(comp.to_string(), 400)
            )),
        }
    }
    report.put("polynomial", non_poly.is_empty());
    if !non_poly.is_empty() {
        report.put("non_polynomial_components", non_poly);
        return Ok(report.with_status(Status::Fail));
    }

    // one-form coefficients g_a with dK = sum g_a du_a
    let mut coords = Vec::new();
    let mut g = Vec::new();
    for (j, &(x, y)) in reg.pairs().iter().enumerate() {
        coords.push(x);
        g.push(-&polys[2 * j + 1]);
        coords.push(y);
        g.push(polys[2 * j].clone());
    }
    let mut closed = true;
    let mut failures = Vec::new();
    for a in 0..coords.len() {
        for b in (a + 1)..coords.len() {
            let lhs = g[a].derivative(coords[b]);
            let rhs = g[b].derivative(coords[a]);
            if lhs != rhs {
                closed = false;
                failures.push(format!("{}/{}", reg.name(coords[a]), reg.name(coords[b])));
            }
        }
    }
    report.put("closed", closed);
    if !closed {
        report.put("closedness_failures", failures);
        return Ok(report.with_status(Status::Fail));
    }

    let k = integrate_hamiltonian(reg, &polys);
    let field = crate::systems::vector_field_of(&k);
    let mut recovered = true;
    for (comp, p) in field.components.iter().zip(&polys) {
        recovered &= comp.to_poly()?.as_ref() == Some(p);
    }
    report
        .put("hamiltonian", k.to_string())
        .put("recovered", recovered);

    // K versus (H - correction) in the new variables
    let inv = c.inverse_substitution(sys)?;
    let mut transformed = inv.apply_poly(&sys.hamiltonian.checked_sub(&c.correction)?)?;
    if let Some(r) = &rel {
        transformed = r.apply(&transformed)?;
    }
    let diff = RatFunc::from_poly(k.clone()).checked_sub(&transformed)?;
    let t_only = reg.dynamical().iter().all(|&v| !diff.involves(v));
    report
        .put("correction", c.correction.to_string())
        .put("matches_transformed_hamiltonian", t_only);
    if t_only {
        let text = match diff.to_poly()? {
            Some(p) => p.to_string(),
            None => diff.to_string(),
        };
        report.put("difference", text);
    }
    Ok(report.with_status(Status::from_bool(recovered)))
}

/// The normalization on the chart's registry, eliminating the system's
/// relation target.
fn chart_relation(sys: &HamiltonianSystem, c: &Chart) -> Result<Substitution> {
    let target = sys
        .relation_target()
        .ok_or_else(|| Error::InvalidInput(format!("{} has no parameter relation", sys.label)))?;
    let name = sys.registry.name(target);
    let image = sys
        .relation_substitution(target)?
        .image(target)
        .to_registry(&c.registry)?;
    Substitution::by_name(&c.registry, &[(name, image)])
}

/// Pushforward and check for one chart. When the field is not polynomial for
/// free parameters and the system has a normalization, the check is repeated
/// with the normalization imposed; `relation_required` records this.
pub fn verify_chart(sys: &HamiltonianSystem, name: &str) -> Result<VerificationReport> {
    let c = chart(sys, name)?;
    let vf = pushforward(sys, &c)?;
    let mut r = check_polynomial_hamiltonian(sys, &vf, &c, false)?;
    let mut relation_required = false;
    if r.payload["polynomial"] == false && sys.normalization.is_some() {
        let free = r.payload.get("non_polynomial_components").cloned();
        r = check_polynomial_hamiltonian(sys, &vf, &c, true)?;
        relation_required = r.payload["polynomial"] == true;
        if let Some(v) = free {
            r.put("non_polynomial_without_relation", v);
        }
    }
    r.put("relation_required", relation_required)
        .put("round_trip", c.round_trip(sys)?)
        .put("symplectic", c.is_symplectic()?);
    let structural = r.payload["round_trip"] == true && r.payload["symplectic"] == true;
    if !structural {
        r.status = Status::Fail;
    }
    Ok(r)
}

pub fn verify_all_charts(sys: &HamiltonianSystem) -> Result<Vec<VerificationReport>> {
    let kind = sys
        .kind
        .ok_or_else(|| Error::InvalidInput("charts exist for d3 and d5 only".into()))?;
    chart_names(kind)
        .into_iter()
        .map(|n| verify_chart(sys, n))
        .collect()
}
