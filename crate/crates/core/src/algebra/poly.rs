use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::registry::VarRegistry;
use crate::error::{Error, Result};

const MAX_EXPONENT: u32 = i32::MAX as u32;

/// Exponent vector, one entry per registry symbol. Ordered graded-lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(Box<[u32]>);

impl Monomial {
    pub fn one(n: usize) -> Self {
        Monomial(vec![0; n].into_boxed_slice())
    }

    pub fn var(n: usize, idx: usize, exp: u32) -> Self {
        let mut v = vec![0; n];
        v[idx] = exp;
        Monomial(v.into_boxed_slice())
    }

    pub fn from_exps(exps: Vec<u32>) -> Self {
        Monomial(exps.into_boxed_slice())
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn exp(&self, idx: usize) -> u32 {
        self.0[idx]
    }

    pub fn degree(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn checked_mul(&self, other: &Monomial) -> Result<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(other.0.iter()) {
            let e = a.checked_add(*b).filter(|&e| e <= MAX_EXPONENT);
            out.push(e.ok_or(Error::ExponentOverflow)?);
        }
        Ok(Monomial(out.into_boxed_slice()))
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    /// `self / other`; caller guarantees divisibility.
    pub fn div(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn gcd(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| *a.min(b))
                .collect(),
        )
    }

    pub fn with_exp(&self, idx: usize, exp: u32) -> Monomial {
        let mut v = self.0.to_vec();
        v[idx] = exp;
        Monomial(v.into_boxed_slice())
    }

    /// All monomials in `vars` of total degree at most `max_deg`, in
    /// ascending order.
    pub fn all_up_to(n: usize, vars: &[usize], max_deg: u32) -> Vec<Monomial> {
        fn rec(n: usize, vars: &[usize], left: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
            match vars.split_first() {
                None => out.push(Monomial(cur.clone().into_boxed_slice())),
                Some((&v, rest)) => {
                    for e in 0..=left {
                        cur[v] = e;
                        rec(n, rest, left - e, cur, out);
                    }
                    cur[v] = 0;
                }
            }
        }
        let mut out = Vec::new();
        rec(n, vars, max_deg, &mut vec![0; n], &mut out);
        out.sort();
        out
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse multivariate polynomial with exact rational coefficients.
#[derive(Clone)]
pub struct MultiPoly {
    reg: Arc<VarRegistry>,
    terms: BTreeMap<Monomial, BigRational>,
}

pub(crate) fn same_registry(a: &Arc<VarRegistry>, b: &Arc<VarRegistry>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl MultiPoly {
    pub fn zero(reg: &Arc<VarRegistry>) -> Self {
        MultiPoly {
            reg: reg.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(reg: &Arc<VarRegistry>) -> Self {
        Self::constant(reg, BigRational::one())
    }

    pub fn constant(reg: &Arc<VarRegistry>, c: BigRational) -> Self {
        let mut p = Self::zero(reg);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(reg.len()), c);
        }
        p
    }

    pub fn var(reg: &Arc<VarRegistry>, name: &str) -> Result<Self> {
        Ok(Self::var_idx(reg, reg.index_of(name)?))
    }

    pub fn var_idx(reg: &Arc<VarRegistry>, idx: usize) -> Self {
        Self::monomial(reg, Monomial::var(reg.len(), idx, 1), BigRational::one())
    }

    pub fn monomial(reg: &Arc<VarRegistry>, m: Monomial, c: BigRational) -> Self {
        assert_eq!(m.0.len(), reg.len(), "exponent vector length");
        let mut p = Self::zero(reg);
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn from_terms(
        reg: &Arc<VarRegistry>,
        terms: impl IntoIterator<Item = (Monomial, BigRational)>,
    ) -> Self {
        let mut p = Self::zero(reg);
        for (m, c) in terms {
            assert_eq!(m.0.len(), reg.len(), "exponent vector length");
            p.add_term(m, c);
        }
        p
    }

    pub fn registry(&self) -> &Arc<VarRegistry> {
        &self.reg
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    pub fn constant_value(&self) -> Option<BigRational> {
        if self.is_zero() {
            Some(BigRational::zero())
        } else if self.is_constant() {
            self.terms.values().next().cloned()
        } else {
            None
        }
    }

    pub fn coeff(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Coefficient of the monomial given by `(symbol, exponent)` factors.
    pub fn coeff_of(&self, factors: &[(&str, u32)]) -> Result<BigRational> {
        let mut exps = vec![0; self.reg.len()];
        for (name, e) in factors {
            exps[self.reg.index_of(name)?] += e;
        }
        Ok(self.coeff(&Monomial::from_exps(exps)))
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().next_back()
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check(&self, other: &MultiPoly) -> Result<()> {
        if same_registry(&self.reg, &other.reg) {
            Ok(())
        } else {
            Err(Error::RegistryMismatch)
        }
    }

    pub fn checked_add(&self, other: &MultiPoly) -> Result<MultiPoly> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &MultiPoly) -> Result<MultiPoly> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &MultiPoly) -> Result<MultiPoly> {
        self.check(other)?;
        let mut out = MultiPoly::zero(&self.reg);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.checked_mul(mb)?, ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &BigRational) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero(&self.reg);
        }
        MultiPoly {
            reg: self.reg.clone(),
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &BigRational) -> Result<MultiPoly> {
        if c.is_zero() {
            return Ok(MultiPoly::zero(&self.reg));
        }
        let mut terms = BTreeMap::new();
        for (k, v) in &self.terms {
            terms.insert(k.checked_mul(m)?, v * c);
        }
        Ok(MultiPoly {
            reg: self.reg.clone(),
            terms,
        })
    }

    pub fn pow(&self, mut e: u32) -> Result<MultiPoly> {
        let mut base = self.clone();
        let mut acc = MultiPoly::one(&self.reg);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.checked_mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.checked_mul(&base)?;
            }
        }
        Ok(acc)
    }

    pub fn derivative(&self, idx: usize) -> MultiPoly {
        let mut out = MultiPoly::zero(&self.reg);
        for (m, c) in &self.terms {
            let e = m.exp(idx);
            if e > 0 {
                out.add_term(
                    m.with_exp(idx, e - 1),
                    c * BigRational::from_integer(e.into()),
                );
            }
        }
        out
    }

    pub fn derivative_by(&self, name: &str) -> Result<MultiPoly> {
        Ok(self.derivative(self.reg.index_of(name)?))
    }

    pub fn degree_in(&self, idx: usize) -> u32 {
        self.terms.keys().map(|m| m.exp(idx)).max().unwrap_or(0)
    }

    /// Maximum over terms of the summed exponents of `indices`.
    pub fn degree_over(&self, indices: &[usize]) -> u64 {
        self.terms
            .keys()
            .map(|m| indices.iter().map(|&i| m.exp(i) as u64).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn total_degree(&self) -> u64 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn involves(&self, idx: usize) -> bool {
        self.terms.keys().any(|m| m.exp(idx) > 0)
    }

    /// Coefficients with respect to one symbol: `self = sum_k out[k] * v^k`.
    pub fn split_by(&self, idx: usize) -> Vec<MultiPoly> {
        let d = self.degree_in(idx) as usize;
        let mut out = vec![MultiPoly::zero(&self.reg); d + 1];
        for (m, c) in &self.terms {
            out[m.exp(idx) as usize].add_term(m.with_exp(idx, 0), c.clone());
        }
        out
    }

    /// Substitutes exact rational values for the given symbols.
    pub fn eval_at(&self, values: &[(usize, BigRational)]) -> MultiPoly {
        let mut out = MultiPoly::zero(&self.reg);
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut mm = m.clone();
            for (idx, v) in values {
                let e = m.exp(*idx);
                if e > 0 {
                    coeff *= num_traits::pow(v.clone(), e as usize);
                    mm = mm.with_exp(*idx, 0);
                }
            }
            out.add_term(mm, coeff);
        }
        out
    }

    /// Replaces symbol `idx` by the polynomial `image` (same registry).
    pub fn compose_var(&self, idx: usize, image: &MultiPoly) -> Result<MultiPoly> {
        self.check(image)?;
        let parts = self.split_by(idx);
        // Horner in the image
        let mut acc = MultiPoly::zero(&self.reg);
        for part in parts.iter().rev() {
            acc = acc.checked_mul(image)?.checked_add(part)?;
        }
        Ok(acc)
    }

    /// Positive rational content: gcd of numerators over lcm of denominators.
    pub fn content(&self) -> BigRational {
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        for c in self.terms.values() {
            num = num.gcd(c.numer());
            den = den.lcm(c.denom());
        }
        if num.is_zero() {
            BigRational::one()
        } else {
            BigRational::new(num, den)
        }
    }

    /// Gcd of all monomials in the support.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.keys();
        match it.next() {
            None => Monomial::one(self.reg.len()),
            Some(first) => it.fold(first.clone(), |g, m| g.gcd(m)),
        }
    }

    pub fn div_monomial(&self, m: &Monomial) -> MultiPoly {
        MultiPoly {
            reg: self.reg.clone(),
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.div(m), v.clone()))
                .collect(),
        }
    }

    /// Exact division; `None` if `divisor` does not divide `self`.
    pub fn try_div(&self, divisor: &MultiPoly) -> Result<Option<MultiPoly>> {
        self.check(divisor)?;
        let (lm, lc) = match divisor.leading_term() {
            Some((m, c)) => (m.clone(), c.clone()),
            None => return Err(Error::ZeroDenominator),
        };
        let mut rem = self.clone();
        let mut quot = MultiPoly::zero(&self.reg);
        while let Some((m, c)) = rem.leading_term() {
            if !lm.divides(m) {
                return Ok(None);
            }
            let qm = m.div(&lm);
            let qc = c / &lc;
            for (dm, dc) in &divisor.terms {
                rem.add_term(dm.checked_mul(&qm)?, -(dc * &qc));
            }
            quot.add_term(qm, qc);
        }
        Ok(Some(quot))
    }

    /// Rewrites the polynomial over another registry, matching symbols by name.
    pub fn to_registry(&self, target: &Arc<VarRegistry>) -> Result<MultiPoly> {
        if same_registry(&self.reg, target) {
            return Ok(MultiPoly {
                reg: target.clone(),
                terms: self.terms.clone(),
            });
        }
        let mut map = Vec::with_capacity(self.reg.len());
        for i in 0..self.reg.len() {
            map.push(target.index_of(self.reg.name(i)).ok());
        }
        let mut out = MultiPoly::zero(target);
        for (m, c) in &self.terms {
            let mut exps = vec![0; target.len()];
            for (i, &e) in m.exps().iter().enumerate() {
                if e > 0 {
                    let j = map[i].ok_or_else(|| Error::UnknownSymbol(self.reg.name(i).into()))?;
                    exps[j] = e;
                }
            }
            out.add_term(Monomial::from_exps(exps), c.clone());
        }
        Ok(out)
    }
}

impl PartialEq for MultiPoly {
    fn eq(&self, other: &Self) -> bool {
        same_registry(&self.reg, &other.reg) && self.terms == other.terms
    }
}

impl Eq for MultiPoly {}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly({self})")
    }
}

pub fn fmt_rational(c: &BigRational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for MultiPoly {
    /// Canonical text: terms in descending graded-lex order, `coeff*sym^e*...`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let mut factors: Vec<String> = Vec::new();
            if m.is_one() || !abs.is_one() {
                factors.push(fmt_rational(&abs));
            }
            for (i, &e) in m.exps().iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(self.reg.name(i).to_string()),
                    _ => factors.push(format!("{}^{}", self.reg.name(i), e)),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

macro_rules! poly_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&MultiPoly> for &MultiPoly {
            type Output = MultiPoly;
            fn $method(self, rhs: &MultiPoly) -> MultiPoly {
                self.$checked(rhs).expect("polynomial arithmetic")
            }
        }
        impl $tr<MultiPoly> for MultiPoly {
            type Output = MultiPoly;
            fn $method(self, rhs: MultiPoly) -> MultiPoly {
                self.$checked(&rhs).expect("polynomial arithmetic")
            }
        }
        impl $tr<&MultiPoly> for MultiPoly {
            type Output = MultiPoly;
            fn $method(self, rhs: &MultiPoly) -> MultiPoly {
                self.$checked(rhs).expect("polynomial arithmetic")
            }
        }
    };
}

poly_binop!(Add, add, checked_add);
poly_binop!(Sub, sub, checked_sub);
poly_binop!(Mul, mul, checked_mul);

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        MultiPoly {
            reg: self.reg.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Neg for MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse::parse_poly;

    fn reg() -> Arc<VarRegistry> {
        VarRegistry::builder()
            .pair("q1", "p1")
            .pair("q2", "p2")
            .time("t")
            .params(["alpha0", "alpha1", "alpha2"])
            .build()
            .unwrap()
    }

    fn p(s: &str) -> MultiPoly {
        parse_poly(&reg(), s).unwrap()
    }

    #[test]
    fn additive_inverse() {
        assert!((p("q1") + p("-q1")).is_zero());
    }

    #[test]
    fn difference_of_squares() {
        assert_eq!(p("q1 + q2") * p("q1 - q2"), p("q1^2 - q2^2"));
    }

    #[test]
    fn first_block_of_d3_hamiltonian() {
        let s = p("2*q1^2*p1") + p("2*p1^2") + p("2*t*p1") + p("2*alpha0*q1");
        assert_eq!(s, p("2*(q1^2*p1 + p1^2 + t*p1 + alpha0*q1)"));
    }

    #[test]
    fn derivatives() {
        assert_eq!(p("q1^2*p1").derivative_by("p1").unwrap(), p("q1^2"));
        let f2 = p("p1 + 2*p2 + t + q1*q2 - q2^2/4");
        assert_eq!(f2.derivative_by("t").unwrap(), p("1"));
        assert!(matches!(
            f2.derivative_by("z"),
            Err(Error::UnknownSymbol(_))
        ));
    }

    #[test]
    fn registry_mismatch_is_an_error() {
        let other = VarRegistry::builder().pair("x", "y").build().unwrap();
        let a = MultiPoly::var(&other, "x").unwrap();
        assert_eq!(a.checked_add(&p("q1")), Err(Error::RegistryMismatch));
    }

    #[test]
    fn grlex_order_in_printing() {
        assert_eq!(
            p("1 + q2 + q1 + p1^2 - 3/2*p1^2*q1").to_string(),
            "-3/2*q1*p1^2 + p1^2 + q1 + q2 + 1"
        );
    }

    #[test]
    fn exact_division() {
        let a = p("q1^2 - q2^2");
        assert_eq!(a.try_div(&p("q1 - q2")).unwrap(), Some(p("q1 + q2")));
        assert_eq!(p("q1^2 + 1").try_div(&p("q1 - q2")).unwrap(), None);
    }

    #[test]
    fn exponent_overflow_detected() {
        let reg = reg();
        let m = Monomial::var(reg.len(), 0, MAX_EXPONENT);
        let big = MultiPoly::monomial(&reg, m, int(1));
        assert_eq!(big.checked_mul(&p("q1")), Err(Error::ExponentOverflow));
    }
}
