use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::poly::{same_registry, Monomial, MultiPoly};
use super::ratfunc::RatFunc;
use super::registry::VarRegistry;
use crate::error::{Error, Result};

/// A ring map sending every symbol of a source registry to a rational
/// function over a target registry.
#[derive(Clone, Debug)]
pub struct Substitution {
    source: Arc<VarRegistry>,
    target: Arc<VarRegistry>,
    images: Vec<RatFunc>,
}

impl Substitution {
    /// Maps the listed symbols; every other source symbol goes to the
    /// target symbol with the same name.
    pub fn new(
        source: &Arc<VarRegistry>,
        target: &Arc<VarRegistry>,
        map: impl IntoIterator<Item = (usize, RatFunc)>,
    ) -> Result<Self> {
        let mut images: Vec<Option<RatFunc>> = vec![None; source.len()];
        for (idx, img) in map {
            if !same_registry(img.registry(), target) {
                return Err(Error::RegistryMismatch);
            }
            images[idx] = Some(img);
        }
        let images = images
            .into_iter()
            .enumerate()
            .map(|(i, img)| match img {
                Some(r) => Ok(r),
                None => RatFunc::var(target, source.name(i)),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Substitution {
            source: source.clone(),
            target: target.clone(),
            images,
        })
    }

    /// Same-registry substitution keyed by symbol name.
    pub fn by_name(reg: &Arc<VarRegistry>, map: &[(&str, RatFunc)]) -> Result<Self> {
        let mut idx_map = Vec::new();
        for (name, img) in map {
            idx_map.push((reg.index_of(name)?, img.clone()));
        }
        Self::new(reg, reg, idx_map)
    }

    pub fn identity(reg: &Arc<VarRegistry>) -> Self {
        Self::new(reg, reg, []).expect("identity substitution")
    }

    pub fn source(&self) -> &Arc<VarRegistry> {
        &self.source
    }

    pub fn target(&self) -> &Arc<VarRegistry> {
        &self.target
    }

    pub fn image(&self, idx: usize) -> &RatFunc {
        &self.images[idx]
    }

    pub fn set_image(&mut self, idx: usize, img: RatFunc) -> Result<()> {
        if !same_registry(img.registry(), &self.target) {
            return Err(Error::RegistryMismatch);
        }
        self.images[idx] = img;
        Ok(())
    }

    pub fn apply_poly(&self, p: &MultiPoly) -> Result<RatFunc> {
        if !same_registry(p.registry(), &self.source) {
            return Err(Error::RegistryMismatch);
        }
        let mut ev = Evaluator::new(self, &[p])?;
        let num = ev.run(p)?;
        let den = ev.common_denominator()?;
        RatFunc::new(num, den)
    }

    pub fn apply(&self, r: &RatFunc) -> Result<RatFunc> {
        if r.den().is_constant() {
            let c = r.den().constant_value().unwrap();
            return Ok(self.apply_poly(r.num())?.scale(&c.recip()));
        }
        if !same_registry(r.registry(), &self.source) {
            return Err(Error::RegistryMismatch);
        }
        let mut ev = Evaluator::new(self, &[r.num(), r.den()])?;
        let num = ev.run(r.num())?;
        let den = ev.run(r.den())?;
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        RatFunc::new(num, den)
    }

    /// `other` after `self`: the substitution x -> other(self(x)).
    pub fn then(&self, other: &Substitution) -> Result<Substitution> {
        if !same_registry(&self.target, &other.source) {
            return Err(Error::RegistryMismatch);
        }
        let images = self
            .images
            .iter()
            .map(|img| other.apply(img))
            .collect::<Result<Vec<_>>>()?;
        Ok(Substitution {
            source: self.source.clone(),
            target: other.target.clone(),
            images,
        })
    }
}

/// Replaces symbols by rational functions inside one expression.
pub fn substitute(target: &RatFunc, images: &[(&str, RatFunc)]) -> Result<RatFunc> {
    Substitution::by_name(target.registry(), images)?.apply(target)
}

/// Evaluates polynomials under a substitution. Image denominators are
/// grouped as powers of shared base polynomials, and every result is
/// multiplied by the smallest common denominator `prod_b base_b^need_b`
/// that clears all terms of the inputs.
struct Evaluator<'a> {
    sub: &'a Substitution,
    /// Per source symbol: (base index, power) when its denominator is not constant.
    den_of: Vec<Option<(usize, u32)>>,
    bases: Vec<MultiPoly>,
    need: Vec<u32>,
    num_pows: Vec<Vec<MultiPoly>>,
    base_pows: Vec<Vec<MultiPoly>>,
    /// Product of constant image denominators, `prod_v c_v^deg_v`.
    const_scale: Vec<(usize, BigRational, u32)>,
}

impl<'a> Evaluator<'a> {
    fn new(sub: &'a Substitution, inputs: &[&MultiPoly]) -> Result<Self> {
        let n = sub.source.len();
        let mut den_of = vec![None; n];
        let mut bases: Vec<MultiPoly> = Vec::new();
        let mut const_scale = Vec::new();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| sub.images[i].den().total_degree());
        for i in order {
            let used = inputs.iter().any(|p| p.involves(i));
            if !used {
                continue;
            }
            let d = sub.images[i].den();
            if let Some(c) = d.constant_value() {
                if !c.is_one() {
                    let deg = inputs.iter().map(|p| p.degree_in(i)).max().unwrap_or(0);
                    const_scale.push((i, c, deg));
                }
                continue;
            }
            let mut found = None;
            for (b, base) in bases.iter().enumerate() {
                let (db, dd) = (base.total_degree(), d.total_degree());
                if dd % db == 0 && base.pow((dd / db) as u32)? == *d {
                    found = Some((b, (dd / db) as u32));
                    break;
                }
            }
            den_of[i] = Some(found.unwrap_or_else(|| {
                bases.push(d.clone());
                (bases.len() - 1, 1)
            }));
        }
        let mut need = vec![0u32; bases.len()];
        for p in inputs {
            for (m, _) in p.terms() {
                let mut used = vec![0u32; bases.len()];
                for (i, slot) in den_of.iter().enumerate() {
                    if let Some((b, k)) = slot {
                        used[*b] += k * m.exp(i);
                    }
                }
                for (nb, u) in need.iter_mut().zip(used) {
                    *nb = (*nb).max(u);
                }
            }
        }
        Ok(Evaluator {
            sub,
            den_of,
            num_pows: vec![Vec::new(); n],
            base_pows: vec![Vec::new(); bases.len()],
            bases,
            need,
            const_scale,
        })
    }

    fn num_pow(&mut self, i: usize, e: u32) -> Result<&MultiPoly> {
        fill_pows(&mut self.num_pows[i], self.sub.images[i].num(), e)?;
        Ok(&self.num_pows[i][e as usize])
    }

    fn base_pow(&mut self, b: usize, e: u32) -> Result<&MultiPoly> {
        fill_pows(&mut self.base_pows[b], &self.bases[b], e)?;
        Ok(&self.base_pows[b][e as usize])
    }

    fn common_denominator(&mut self) -> Result<MultiPoly> {
        let mut acc = MultiPoly::one(&self.sub.target);
        for b in 0..self.bases.len() {
            let e = self.need[b];
            let pw = self.base_pow(b, e)?.clone();
            acc = acc.checked_mul(&pw)?;
        }
        for (_, c, deg) in &self.const_scale {
            acc = acc.scale(&num_traits::pow(c.clone(), *deg as usize));
        }
        Ok(acc)
    }

    fn run(&mut self, p: &MultiPoly) -> Result<MultiPoly> {
        let terms: Vec<(Monomial, BigRational)> =
            p.terms().map(|(m, c)| (m.clone(), c.clone())).collect();
        let used = vec![0u32; self.bases.len()];
        self.rec(terms, 0, used)
    }

    fn rec(
        &mut self,
        terms: Vec<(Monomial, BigRational)>,
        i: usize,
        used: Vec<u32>,
    ) -> Result<MultiPoly> {
        let target = self.sub.target.clone();
        if terms.is_empty() {
            return Ok(MultiPoly::zero(&target));
        }
        if i == self.sub.source.len() {
            let mut c = BigRational::zero();
            for (_, v) in terms {
                c += v;
            }
            for (_, k, deg) in &self.const_scale {
                c *= num_traits::pow(k.clone(), *deg as usize);
            }
            let mut acc = MultiPoly::constant(&target, c);
            for b in 0..self.bases.len() {
                let e = self.need[b] - used[b];
                if e > 0 {
                    let pw = self.base_pow(b, e)?.clone();
                    acc = mul_factor(&pw, &acc)?;
                }
            }
            return Ok(acc);
        }
        let mut groups: BTreeMap<u32, Vec<(Monomial, BigRational)>> = BTreeMap::new();
        for (m, c) in terms {
            groups.entry(m.exp(i)).or_default().push((m, c));
        }
        if groups.len() == 1 && groups.contains_key(&0) {
            let (_, g) = groups.into_iter().next().unwrap();
            return self.rec(g, i + 1, used);
        }
        let mut acc = MultiPoly::zero(&target);
        for (e, group) in groups {
            let mut u = used.clone();
            if let Some((b, k)) = self.den_of[i] {
                u[b] += k * e;
            }
            let inner = self.rec(group, i + 1, u)?;
            if inner.is_zero() {
                continue;
            }
            let piece = if e > 0 {
                mul_factor(&inner, self.num_pow(i, e)?)?
            } else {
                inner
            };
            acc = acc.checked_add(&piece)?;
        }
        Ok(acc)
    }
}

fn fill_pows(cache: &mut Vec<MultiPoly>, base: &MultiPoly, e: u32) -> Result<()> {
    if cache.is_empty() {
        cache.push(MultiPoly::one(base.registry()));
    }
    while cache.len() <= e as usize {
        let next = cache.last().unwrap().checked_mul(base)?;
        cache.push(next);
    }
    Ok(())
}

fn mul_factor(a: &MultiPoly, b: &MultiPoly) -> Result<MultiPoly> {
    if b.num_terms() == 1 {
        let (m, c) = b.terms().next().unwrap();
        if m.is_one() && c.is_one() {
            return Ok(a.clone());
        }
        return a.mul_monomial(m, c);
    }
    a.checked_mul(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse::parse_ratfunc;

    fn reg() -> Arc<VarRegistry> {
        VarRegistry::builder()
            .pair("q1", "p1")
            .pair("q2", "p2")
            .pair("x0", "y0")
            .time("t")
            .params(["alpha0", "alpha1", "alpha2"])
            .build()
            .unwrap()
    }

    fn r(s: &str) -> RatFunc {
        parse_ratfunc(&reg(), s).unwrap()
    }

    #[test]
    fn untouched_variable_stays() {
        let out = substitute(&r("p2"), &[("q2", r("q2 + alpha1/p2"))]).unwrap();
        assert!(out.equals(&r("p2")).unwrap());
    }

    #[test]
    fn reciprocal_image() {
        let out = substitute(&r("q1^2"), &[("q1", r("1/x0"))]).unwrap();
        assert!(out.equals(&r("1/x0^2")).unwrap());
    }

    #[test]
    fn rational_target() {
        let out = substitute(&r("(q1 + 1)/(q1 - 1)"), &[("q1", r("1/x0"))]).unwrap();
        assert!(out.equals(&r("(1 + x0)/(1 - x0)")).unwrap());
    }

    #[test]
    fn zero_denominator_detected() {
        let e = substitute(&r("1/(q1 - q2)"), &[("q1", r("q2"))]);
        assert_eq!(e.unwrap_err(), Error::ZeroDenominator);
    }
}
