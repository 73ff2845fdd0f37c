use std::fmt;
use std::sync::Arc;

use num_traits::Signed;

use crate::algebra::{MultiPoly, RatFunc, Substitution, VarRegistry};
use crate::error::{Error, Result};

/// Linear action `alpha -> M alpha` on the parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamAction {
    pub label: String,
    pub matrix: Vec<Vec<i64>>,
}

impl ParamAction {
    pub fn identity(n: usize) -> Self {
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
            .collect();
        ParamAction {
            label: "id".into(),
            matrix,
        }
    }

    pub fn new(label: &str, matrix: Vec<Vec<i64>>) -> Self {
        ParamAction {
            label: label.to_string(),
            matrix,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn is_identity(&self) -> bool {
        *self
            == ParamAction {
                label: self.label.clone(),
                ..Self::identity(self.dim())
            }
    }

    /// `self` after `inner`: the product `self.matrix * inner.matrix`.
    pub fn after(&self, inner: &ParamAction) -> ParamAction {
        let n = self.dim();
        let mut m = vec![vec![0i64; n]; n];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..n).map(|k| self.matrix[i][k] * inner.matrix[k][j]).sum();
            }
        }
        ParamAction {
            label: format!("{}.{}", inner.label, self.label),
            matrix: m,
        }
    }

    /// Whether `alpha_0 + ... + alpha_n` is invariant (every column of `M`
    /// sums to one).
    pub fn preserves_sum(&self) -> bool {
        let n = self.dim();
        (0..n).all(|j| (0..n).map(|i| self.matrix[i][j]).sum::<i64>() == 1)
    }

    pub fn determinant(&self) -> i64 {
        // Bareiss on a tiny integer matrix
        let n = self.dim();
        let mut a = self.matrix.clone();
        let mut sign = 1i64;
        let mut prev = 1i64;
        for k in 0..n {
            if a[k][k] == 0 {
                match (k + 1..n).find(|&r| a[r][k] != 0) {
                    Some(r) => {
                        a.swap(k, r);
                        sign = -sign;
                    }
                    None => return 0,
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
                }
            }
            prev = a[k][k];
        }
        sign * a[n - 1][n - 1]
    }

    /// Images of the parameters as linear polynomials.
    pub fn images(&self, reg: &Arc<VarRegistry>) -> Vec<MultiPoly> {
        let params = reg.params();
        self.matrix
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&params)
                    .fold(MultiPoly::zero(reg), |acc, (&c, &p)| {
                        acc + MultiPoly::var_idx(reg, p).scale(&crate::algebra::int(c))
                    })
            })
            .collect()
    }
}

/// A birational map of the phase space together with its parameter action.
/// `images[k]` is the image of the k-th dynamical variable; `t` is fixed.
#[derive(Clone)]
pub struct BirationalMap {
    pub registry: Arc<VarRegistry>,
    pub images: Vec<RatFunc>,
    pub params: ParamAction,
    pub label: String,
    pub word: Vec<String>,
    /// Polynomials known to divide the image denominators; used to cancel
    /// common factors after composition.
    pub factors: Vec<MultiPoly>,
}

impl fmt::Debug for BirationalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BirationalMap")
            .field("label", &self.label)
            .field("images", &self.images)
            .field("params", &self.params.matrix)
            .finish()
    }
}

impl BirationalMap {
    pub fn identity(reg: &Arc<VarRegistry>) -> Self {
        let images = reg
            .dynamical()
            .into_iter()
            .map(|v| RatFunc::from_poly(MultiPoly::var_idx(reg, v)))
            .collect();
        BirationalMap {
            registry: reg.clone(),
            images,
            params: ParamAction::identity(reg.params().len()),
            label: "id".into(),
            word: Vec::new(),
            factors: Vec::new(),
        }
    }

    pub fn image_of(&self, name: &str) -> Result<&RatFunc> {
        let idx = self.registry.index_of(name)?;
        let k = self
            .registry
            .dynamical()
            .iter()
            .position(|&v| v == idx)
            .ok_or_else(|| Error::UnknownSymbol(name.into()))?;
        Ok(&self.images[k])
    }

    /// The ring substitution `g -> g(images, M alpha)`.
    pub fn substitution(&self) -> Result<Substitution> {
        let reg = &self.registry;
        let mut map: Vec<(usize, RatFunc)> = reg
            .dynamical()
            .into_iter()
            .zip(self.images.iter().cloned())
            .collect();
        for (p, img) in reg.params().into_iter().zip(self.params.images(reg)) {
            map.push((p, RatFunc::from_poly(img)));
        }
        Substitution::new(reg, reg, map)
    }

    pub fn apply(&self, g: &RatFunc) -> Result<RatFunc> {
        self.substitution()?.apply(g)
    }

    /// True when every variable image equals the variable and the parameter
    /// action is trivial.
    pub fn is_identity(&self) -> Result<bool> {
        if !self.params.is_identity() {
            return Ok(false);
        }
        for (img, v) in self.images.iter().zip(self.registry.dynamical()) {
            if !img.equals(&RatFunc::from_poly(MultiPoly::var_idx(&self.registry, v)))? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Apply `inner` first, then `outer`.
pub fn compose(outer: &BirationalMap, inner: &BirationalMap) -> Result<BirationalMap> {
    let sub = inner.substitution()?;
    let inner_factors = inner.known_factors();
    let mut factors = inner_factors.clone();
    for f in outer.known_factors() {
        let mut img = sub.apply_poly(&f)?;
        for b in &inner_factors {
            img = img.cancel_factor(b)?;
        }
        let mut p = primitive(img.num());
        for b in &inner_factors {
            while let Some(q) = p.try_div(b)? {
                if q.is_constant() {
                    break;
                }
                p = q;
            }
        }
        push_factor(&mut factors, p);
    }
    let images = outer
        .images
        .iter()
        .map(|img| {
            let cancel = |mut r: RatFunc| -> Result<RatFunc> {
                for b in &factors {
                    r = r.cancel_factor(b)?;
                }
                Ok(r)
            };
            let num = cancel(sub.apply_poly(img.num())?)?;
            if img.den().is_constant() {
                return Ok(num.scale(&img.den().constant_value().unwrap().recip()));
            }
            let den = cancel(sub.apply_poly(img.den())?)?;
            cancel(num.checked_div(&den)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut word = inner.word.clone();
    word.extend(outer.word.iter().cloned());
    Ok(BirationalMap {
        registry: outer.registry.clone(),
        images,
        params: outer.params.after(&inner.params),
        label: word.join(","),
        word,
        factors,
    })
}

fn primitive(p: &MultiPoly) -> MultiPoly {
    let p = p.div_monomial(&p.monomial_content());
    let mut s = p.content().recip();
    if p.leading_term()
        .map(|(_, c)| c.is_negative())
        .unwrap_or(false)
    {
        s = -s;
    }
    p.scale(&s)
}

fn push_factor(factors: &mut Vec<MultiPoly>, p: MultiPoly) {
    if !p.is_constant() && !factors.contains(&p) {
        factors.push(p);
    }
}

impl BirationalMap {
    fn known_factors(&self) -> Vec<MultiPoly> {
        let mut out = self.factors.clone();
        for img in &self.images {
            push_factor(&mut out, primitive(img.den()));
        }
        out
    }
}

pub fn apply_map(m: &BirationalMap, g: &RatFunc) -> Result<RatFunc> {
    m.apply(g)
}
