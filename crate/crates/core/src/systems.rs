//! The D3(2) and D5(2) Hamiltonian systems, the canonical Poisson bracket and
//! derivatives along the flow.
//!
//! Bracket convention: `{A, B} = sum_i (dA/dp_i dB/dq_i - dA/dq_i dB/dp_i)`, so
//! `{p_i, q_i} = 1` and the time derivative of `g` along the flow of `H` is
//! `{H, g} + dg/dt`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_rational::BigRational;

use crate::algebra::{int, rat, MultiPoly, RatFunc, Substitution, VarRegistry};
use crate::error::{Error, Result};
use crate::report::{Status, VerificationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SystemKind {
    D3,
    D5,
}

impl SystemKind {
    pub fn label(self) -> &'static str {
        match self {
            SystemKind::D3 => "d3",
            SystemKind::D5 => "d5",
        }
    }

    pub fn num_params(self) -> usize {
        match self {
            SystemKind::D3 => 3,
            SystemKind::D5 => 5,
        }
    }

    pub fn num_pairs(self) -> usize {
        match self {
            SystemKind::D3 => 2,
            SystemKind::D5 => 4,
        }
    }

    /// The value of `alpha0 + ... + alphaN` on the normalized parameter space.
    pub fn normalization(self) -> BigRational {
        match self {
            SystemKind::D3 => rat(1, 2),
            SystemKind::D5 => int(1),
        }
    }

    pub fn registry(self) -> Arc<VarRegistry> {
        let mut b = VarRegistry::builder();
        for i in 1..=self.num_pairs() {
            b = b.pair(&format!("q{i}"), &format!("p{i}"));
        }
        b = b.time("t");
        for i in 0..self.num_params() {
            b = b.param(&format!("alpha{i}"));
        }
        b.build().expect("static registry")
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SystemKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "d3" => Ok(SystemKind::D3),
            "d5" => Ok(SystemKind::D5),
            other => Err(Error::InvalidInput(format!("unknown system `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct HamiltonianSystem {
    pub label: String,
    pub kind: Option<SystemKind>,
    pub registry: Arc<VarRegistry>,
    pub hamiltonian: MultiPoly,
    /// Sum of all parameters on the normalized space, if the system has one.
    pub normalization: Option<BigRational>,
}

/// One polynomial right-hand side per dynamical variable, in registry order.
#[derive(Debug, Clone)]
pub struct VectorField {
    pub registry: Arc<VarRegistry>,
    pub vars: Vec<usize>,
    pub components: Vec<RatFunc>,
}

impl VectorField {
    pub fn component(&self, var: usize) -> Option<&RatFunc> {
        self.vars
            .iter()
            .position(|&v| v == var)
            .map(|k| &self.components[k])
    }

    pub fn component_by(&self, name: &str) -> Result<&RatFunc> {
        let idx = self.registry.index_of(name)?;
        self.component(idx)
            .ok_or_else(|| Error::UnknownSymbol(name.into()))
    }

    /// Total derivative of a polynomial along this field:
    /// `sum_j dg/dz_j * zdot_j + dg/dt`.
    pub fn derivative_along(&self, g: &MultiPoly) -> Result<RatFunc> {
        let mut acc = RatFunc::from_poly(time_derivative(g));
        for (&v, comp) in self.vars.iter().zip(&self.components) {
            let d = g.derivative(v);
            if !d.is_zero() {
                acc = acc.checked_add(&comp.mul_poly(&d)?)?;
            }
        }
        Ok(acc)
    }
}

fn time_derivative(g: &MultiPoly) -> MultiPoly {
    match g.registry().time() {
        Some(t) => g.derivative(t),
        None => MultiPoly::zero(g.registry()),
    }
}

pub fn poisson_bracket(a: &MultiPoly, b: &MultiPoly) -> Result<MultiPoly> {
    let reg = a.registry().clone();
    let mut acc = MultiPoly::zero(&reg);
    for &(q, p) in reg.pairs() {
        let t1 = a.derivative(p).checked_mul(&b.derivative(q))?;
        let t2 = a.derivative(q).checked_mul(&b.derivative(p))?;
        acc = acc.checked_add(&t1)?.checked_sub(&t2)?;
    }
    Ok(acc)
}

/// Poisson bracket of rational functions under the same convention.
pub fn poisson_bracket_rf(a: &RatFunc, b: &RatFunc) -> Result<RatFunc> {
    let reg = a.registry().clone();
    let mut acc = RatFunc::zero(&reg);
    for &(q, p) in reg.pairs() {
        let t1 = a.derivative(p)?.checked_mul(&b.derivative(q)?)?;
        let t2 = a.derivative(q)?.checked_mul(&b.derivative(p)?)?;
        acc = acc.checked_add(&t1)?.checked_sub(&t2)?;
    }
    Ok(acc)
}

/// `H_II(x, y, t; a) = x^2 y + y^2 + t y + a x`.
pub fn h_ii(x: &MultiPoly, y: &MultiPoly, t: &MultiPoly, a: &MultiPoly) -> MultiPoly {
    &(&(x * x) * y) + &(y * y) + (t * y) + (a * x)
}

/// `H_II^auto(z, w; a) = z^2 w - 2 w^2 + a z`.
pub fn h_ii_auto(z: &MultiPoly, w: &MultiPoly, a: &MultiPoly) -> MultiPoly {
    &(&(z * z) * w) - &(w * w).scale(&int(2)) + (a * z)
}

fn d3_hamiltonian(reg: &Arc<VarRegistry>) -> Result<MultiPoly> {
    let v = |n: &str| MultiPoly::var(reg, n);
    let (q1, p1, q2, p2, t) = (v("q1")?, v("p1")?, v("q2")?, v("p2")?, v("t")?);
    let (a0, a1) = (v("alpha0")?, v("alpha1")?);
    let coupling = (&p1 * &p2).scale(&int(4)) - (&(&q1 * &q2) * &p2).scale(&int(2));
    Ok(h_ii(&q1, &p1, &t, &a0).scale(&int(2)) + h_ii_auto(&q2, &p2, &a1) + coupling)
}

fn d5_hamiltonian(reg: &Arc<VarRegistry>) -> Result<MultiPoly> {
    let d3_reg = SystemKind::D3.registry();
    let h = d3_hamiltonian(&d3_reg)?;
    let var = |n: &str| RatFunc::var(reg, n);
    let idx = |n: &str| d3_reg.index_of(n);
    let first = Substitution::new(&d3_reg, reg, [])?;
    // second block: (q1, p1, q2, p2; alpha0, alpha1) -> (q4, p4, q3, p3; alpha4, alpha3)
    let second = Substitution::new(
        &d3_reg,
        reg,
        [
            (idx("q1")?, var("q4")?),
            (idx("p1")?, var("p4")?),
            (idx("q2")?, var("q3")?),
            (idx("p2")?, var("p3")?),
            (idx("alpha0")?, var("alpha4")?),
            (idx("alpha1")?, var("alpha3")?),
            (idx("alpha2")?, RatFunc::zero(reg)),
        ],
    )?;
    let poly = |r: RatFunc| r.to_poly().map(|p| p.expect("polynomial image"));
    let p1 = MultiPoly::var(reg, "p1")?;
    let p4 = MultiPoly::var(reg, "p4")?;
    let coupling =
        (&p1 * &p4).scale(&int(3)) - (&p1 * &p1).scale(&rat(3, 2)) - (&p4 * &p4).scale(&rat(3, 2));
    Ok(poly(first.apply_poly(&h)?)? + poly(second.apply_poly(&h)?)? + coupling)
}

pub fn build_system(kind: SystemKind) -> HamiltonianSystem {
    let reg = kind.registry();
    let hamiltonian = match kind {
        SystemKind::D3 => d3_hamiltonian(&reg),
        SystemKind::D5 => d5_hamiltonian(&reg),
    }
    .expect("static Hamiltonian");
    HamiltonianSystem {
        label: kind.label().to_string(),
        kind: Some(kind),
        registry: reg,
        hamiltonian,
        normalization: Some(kind.normalization()),
    }
}

/// The autonomous subsystem with Hamiltonian `H_II^auto(z, w; alpha1)`.
pub fn build_auto_subsystem() -> HamiltonianSystem {
    let reg = VarRegistry::builder()
        .pair("z", "w")
        .param("alpha1")
        .build()
        .expect("static registry");
    let v = |n: &str| MultiPoly::var(&reg, n).unwrap();
    let hamiltonian = h_ii_auto(&v("z"), &v("w"), &v("alpha1"));
    HamiltonianSystem {
        label: "h2auto".to_string(),
        kind: None,
        registry: reg,
        hamiltonian,
        normalization: None,
    }
}

impl HamiltonianSystem {
    pub fn params(&self) -> Vec<usize> {
        self.registry.params()
    }

    pub fn dynamical(&self) -> Vec<usize> {
        self.registry.dynamical()
    }

    pub fn poly(&self, src: &str) -> Result<MultiPoly> {
        crate::algebra::parse_poly(&self.registry, src)
    }

    pub fn ratfunc(&self, src: &str) -> Result<RatFunc> {
        crate::algebra::parse_ratfunc(&self.registry, src)
    }

    /// Checks the structural conditions on the Hamiltonian: total degree 3 in
    /// the dynamical variables, at most linear in each parameter and in `t`.
    pub fn check_shape(&self) -> Result<()> {
        let dyn_vars = self.dynamical();
        if self.hamiltonian.degree_over(&dyn_vars) != 3 {
            return Err(Error::Verification("Hamiltonian is not of degree 3".into()));
        }
        let mut linear = self.params();
        linear.extend(self.registry.time());
        for v in linear {
            if self.hamiltonian.degree_in(v) > 1 {
                return Err(Error::Verification(format!(
                    "Hamiltonian is not linear in {}",
                    self.registry.name(v)
                )));
            }
        }
        Ok(())
    }

    pub fn vector_field(&self) -> VectorField {
        vector_field_of(&self.hamiltonian)
    }

    /// `{H, g} + dg/dt`, cross-checked against the vector-field route.
    pub fn flow_derivative(&self, g: &MultiPoly) -> Result<MultiPoly> {
        let bracket_route =
            poisson_bracket(&self.hamiltonian, g)?.checked_add(&time_derivative(g))?;
        let field_route = self.vector_field().derivative_along(g)?;
        if !field_route.equals(&RatFunc::from_poly(bracket_route.clone()))? {
            return Err(Error::Verification(
                "bracket and vector-field routes disagree".into(),
            ));
        }
        Ok(bracket_route)
    }

    /// Derivative of a rational function along the flow (quotient rule).
    pub fn flow_derivative_rf(&self, g: &RatFunc) -> Result<RatFunc> {
        let dn = self.flow_derivative_fast(g.num())?;
        if g.den().is_constant() {
            return RatFunc::new(dn, g.den().clone());
        }
        let dd = self.flow_derivative_fast(g.den())?;
        let num = dn
            .checked_mul(g.den())?
            .checked_sub(&g.num().checked_mul(&dd)?)?;
        RatFunc::new(num, g.den().pow(2)?)
    }

    /// Bracket route only.
    pub(crate) fn flow_derivative_fast(&self, g: &MultiPoly) -> Result<MultiPoly> {
        poisson_bracket(&self.hamiltonian, g)?.checked_add(&time_derivative(g))
    }

    /// The parameter rewritten when the normalization is imposed: the one
    /// with the highest index.
    pub fn relation_target(&self) -> Option<usize> {
        self.normalization
            .as_ref()
            .and_then(|_| self.params().last().copied())
    }

    /// Rewrites `alpha_idx` as `normalization - sum of the other parameters`.
    pub fn relation_substitution(&self, idx: usize) -> Result<Substitution> {
        let n = self.normalization.clone().ok_or_else(|| {
            Error::InvalidInput(format!("{} has no parameter relation", self.label))
        })?;
        let mut image = MultiPoly::constant(&self.registry, n);
        for a in self.params() {
            if a != idx {
                image = image.checked_sub(&MultiPoly::var_idx(&self.registry, a))?;
            }
        }
        Substitution::new(
            &self.registry,
            &self.registry,
            [(idx, RatFunc::from_poly(image))],
        )
    }

    /// Imposes the normalization by rewriting the highest-index parameter.
    pub fn impose_relation(&self, p: &MultiPoly) -> Result<MultiPoly> {
        let idx = self.relation_target().ok_or_else(|| {
            Error::InvalidInput(format!("{} has no parameter relation", self.label))
        })?;
        self.impose_relation_on(p, idx)
    }

    pub fn impose_relation_on(&self, p: &MultiPoly, idx: usize) -> Result<MultiPoly> {
        let sub = self.relation_substitution(idx)?;
        Ok(sub.apply_poly(p)?.to_poly()?.expect("polynomial image"))
    }

    pub fn impose_relation_rf(&self, r: &RatFunc) -> Result<RatFunc> {
        let idx = self.relation_target().ok_or_else(|| {
            Error::InvalidInput(format!("{} has no parameter relation", self.label))
        })?;
        self.relation_substitution(idx)?.apply(r)
    }
}

/// `qdot_i = dH/dp_i`, `pdot_i = -dH/dq_i`, in registry order.
pub fn vector_field_of(h: &MultiPoly) -> VectorField {
    let reg = h.registry().clone();
    let vars = reg.dynamical();
    let mut components = Vec::with_capacity(vars.len());
    for &v in &vars {
        let sym = reg.symbol(v);
        let (q, p) = reg.pairs()[sym.pair.expect("dynamical symbol has a pair")];
        let comp = if v == q {
            h.derivative(p)
        } else {
            -h.derivative(q)
        };
        components.push(RatFunc::from_poly(comp));
    }
    VectorField {
        registry: reg,
        vars,
        components,
    }
}

/// Right-hand sides as printed, in registry order.
const D3_PRINTED_FIELD: [(&str, &str); 4] = [
    ("q1", "2*q1^2 + 4*p1 + 2*t + 4*p2"),
    ("p1", "-4*q1*p1 + 2*q2*p2 - 2*alpha0"),
    ("q2", "q2^2 - 4*p2 + 4*p1 - 2*q1*q2"),
    ("p2", "-2*q2*p2 + 2*q1*p2 - alpha1"),
];

const D5_PRINTED_FIELD: [(&str, &str); 8] = [
    ("q1", "2*q1^2 + p1 + 2*t + 4*p2 + 3*p4"),
    ("p1", "-4*q1*p1 + 2*q2*p2 - 2*alpha0"),
    ("q2", "q2^2 - 4*p2 + 4*p1 - 2*q1*q2"),
    ("p2", "-2*q2*p2 + 2*q1*p2 - alpha1"),
    ("q3", "q3^2 - 4*p3 + 4*p4 - 2*q3*q4"),
    ("p3", "-2*q3*p3 + 2*q4*p3 - alpha3"),
    ("q4", "2*q4^2 + p4 + 2*t + 3*p1 + 4*p3"),
    ("p4", "-4*q4*p4 + 2*q3*p3 - 2*alpha4"),
];

/// Compares the vector field of the Hamiltonian with the printed equations.
pub fn verify_vector_field(sys: &HamiltonianSystem) -> Result<VerificationReport> {
    let start = std::time::Instant::now();
    let printed: &[(&str, &str)] = match sys.kind {
        Some(SystemKind::D3) => &D3_PRINTED_FIELD,
        Some(SystemKind::D5) => &D5_PRINTED_FIELD,
        None => {
            return Err(Error::InvalidInput(format!(
                "no printed equations for {}",
                sys.label
            )))
        }
    };
    let vf = sys.vector_field();
    let mut mismatches = serde_json::Map::new();
    for (var, text) in printed {
        let want = sys.ratfunc(text)?;
        let got = vf.component_by(var)?;
        if !got.equals(&want)? {
            mismatches.insert(var.to_string(), got.checked_sub(&want)?.to_string().into());
        }
    }
    let mut r = VerificationReport::new("vector-field", &sys.label, "hamiltonian");
    r.put("components", printed.len());
    let ok = mismatches.is_empty();
    if !ok {
        r.put("residuals", serde_json::Value::Object(mismatches));
    }
    Ok(r.with_status(Status::from_bool(ok)).timed(start))
}

/// `dH/dt` along the flow against its expected closed form.
pub fn hamiltonian_flow_report(sys: &HamiltonianSystem) -> Result<VerificationReport> {
    let start = std::time::Instant::now();
    let expected = match sys.kind {
        Some(SystemKind::D3) => sys.poly("2*p1")?,
        Some(SystemKind::D5) => sys.poly("2*p1 + 2*p4")?,
        None => MultiPoly::zero(&sys.registry),
    };
    let got = sys.flow_derivative(&sys.hamiltonian)?;
    let mut r = VerificationReport::new("hamiltonian-flow", &sys.label, "dH/dt");
    r.put("flow_derivative", got.to_string())
        .put("expected", expected.to_string())
        .put("conserved", got.is_zero());
    Ok(r.with_status(Status::from_bool(got == expected))
        .timed(start))
}
