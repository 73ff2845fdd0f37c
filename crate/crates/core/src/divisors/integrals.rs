//! Search for polynomial first integrals by an exact nullspace computation.

use num_rational::BigRational;
use rayon::prelude::*;

use crate::algebra::{fmt_rational, Monomial, MultiPoly};
use crate::characterize::ExactLinearSystem;
use crate::error::Result;
use crate::report::{Status, VerificationReport};
use crate::sampling::alpha_samples;
use crate::systems::{h_ii_auto, HamiltonianSystem};

/// Outcome of a first-integral search: one basis per parameter sample. Each
/// basis is in reduced echelon form with respect to the monomial order, so
/// bases for different samples can be compared term by term.
#[derive(Debug, Clone)]
pub struct IntegralSearch {
    pub max_deg: u32,
    pub t_deg: u32,
    pub unknowns: usize,
    pub samples: Vec<Vec<(usize, BigRational)>>,
    pub bases: Vec<Vec<MultiPoly>>,
}

impl IntegralSearch {
    /// Common dimension of the solution spaces, `None` if samples disagree.
    pub fn dimension(&self) -> Option<usize> {
        let first = self.bases.first()?.len();
        self.bases.iter().all(|b| b.len() == first).then_some(first)
    }

    /// True when every sample's basis has the same monomial supports.
    pub fn supports_agree(&self) -> bool {
        let support = |b: &Vec<MultiPoly>| -> Vec<Vec<Monomial>> {
            b.iter()
                .map(|p| p.terms().map(|(m, _)| m.clone()).collect())
                .collect()
        };
        match self.bases.first() {
            None => true,
            Some(b0) => {
                let s0 = support(b0);
                self.bases.iter().all(|b| support(b) == s0)
            }
        }
    }

    pub fn sample_labels(&self, reg_names: impl Fn(usize) -> String) -> Vec<String> {
        self.samples
            .iter()
            .map(|s| {
                s.iter()
                    .map(|(a, v)| format!("{}={}", reg_names(*a), fmt_rational(v)))
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect()
    }
}

/// Polynomials `F` of degree at most `max_deg` in the dynamical variables and
/// at most `t_deg` in `t` with `dF/dt = 0` along the flow, at `samples`
/// random parameter values drawn from `seed`.
pub fn first_integral_search(
    sys: &HamiltonianSystem,
    max_deg: u32,
    t_deg: u32,
    samples: usize,
    seed: u64,
) -> Result<IntegralSearch> {
    let reg = &sys.registry;
    let dyn_vars = sys.dynamical();
    let mut monomials = Vec::new();
    let t_max = if reg.time().is_some() { t_deg } else { 0 };
    for m in Monomial::all_up_to(reg.len(), &dyn_vars, max_deg) {
        for e in 0..=t_max {
            monomials.push(match reg.time() {
                Some(t) => m.with_exp(t, e),
                None => m.clone(),
            });
        }
    }
    monomials.sort();
    let alphas = alpha_samples(sys, samples, seed, &[]);
    let bases = alphas
        .par_iter()
        .map(|alpha| nullspace_at(sys, &monomials, alpha))
        .collect::<Result<Vec<_>>>()?;
    Ok(IntegralSearch {
        max_deg,
        t_deg: t_max,
        unknowns: monomials.len(),
        samples: alphas,
        bases,
    })
}

fn nullspace_at(
    sys: &HamiltonianSystem,
    monomials: &[Monomial],
    alpha: &[(usize, BigRational)],
) -> Result<Vec<MultiPoly>> {
    let reg = &sys.registry;
    let h = sys.hamiltonian.eval_at(alpha);
    let specialized = HamiltonianSystem {
        hamiltonian: h,
        ..sys.clone()
    };
    // Unknowns in ascending monomial order: the free unknowns of the echelon
    // form are then the leading monomials of the basis elements.
    let n = monomials.len();
    let mut rows: std::collections::BTreeMap<Monomial, Vec<(usize, BigRational)>> =
        Default::default();
    for (k, m) in monomials.iter().enumerate() {
        let one = BigRational::from_integer(1.into());
        let d = specialized.flow_derivative_fast(&MultiPoly::monomial(reg, m.clone(), one))?;
        for (mu, c) in d.terms() {
            rows.entry(mu.clone()).or_default().push((k, c.clone()));
        }
    }
    let mut system = ExactLinearSystem::new(n);
    for (_, row) in rows {
        system.add_row(row, BigRational::from_integer(0.into()))?;
    }
    let sol = system.solve()?;
    let basis = sol
        .nullspace
        .iter()
        .map(|v| MultiPoly::from_terms(reg, monomials.iter().cloned().zip(v.iter().cloned())))
        .collect();
    Ok(basis)
}

/// Report for a search. The coupled systems pass when only constants
/// survive; the autonomous subsystem passes when the space is spanned by 1
/// and its Hamiltonian.
pub fn integral_report(
    sys: &HamiltonianSystem,
    search: &IntegralSearch,
) -> Result<VerificationReport> {
    let reg = &sys.registry;
    let one = MultiPoly::one(reg);
    let ok = search
        .bases
        .iter()
        .zip(&search.samples)
        .all(|(basis, alpha)| match sys.kind {
            Some(_) => basis.len() == 1 && basis[0] == one,
            None => {
                basis.len() == 2 && basis.contains(&one) && spans_hamiltonian(sys, basis, alpha)
            }
        });
    let mut r = VerificationReport::new(
        "first-integrals",
        &sys.label,
        &format!("deg<={}", search.max_deg),
    );
    let bases: Vec<Vec<String>> = search
        .bases
        .iter()
        .map(|b| b.iter().map(|p| p.to_string()).collect())
        .collect();
    r.put("unknowns", search.unknowns)
        .put("t_deg", search.t_deg)
        .put(
            "samples",
            serde_json::to_value(search.sample_labels(|a| reg.name(a).to_string())).expect("json"),
        )
        .put("dimension", search.dimension())
        .put("supports_agree", search.supports_agree())
        .put("bases", serde_json::to_value(bases).expect("json"));
    Ok(r.with_status(Status::from_bool(ok && search.supports_agree())))
}

/// True when the autonomous Hamiltonian at `alpha` lies in the span of `basis`.
fn spans_hamiltonian(
    sys: &HamiltonianSystem,
    basis: &[MultiPoly],
    alpha: &[(usize, BigRational)],
) -> bool {
    let reg = &sys.registry;
    let (Ok(z), Ok(w), Ok(a)) = (
        MultiPoly::var(reg, "z"),
        MultiPoly::var(reg, "w"),
        MultiPoly::var(reg, "alpha1"),
    ) else {
        return false;
    };
    let mut rest = h_ii_auto(&z, &w, &a).eval_at(alpha);
    for b in basis {
        let Some((m, c)) = b.leading_term() else {
            continue;
        };
        let k = rest.coeff(m) / c;
        rest = rest - b.scale(&k);
    }
    rest.is_zero()
}
