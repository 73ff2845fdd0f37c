use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Signed};

use super::poly::{same_registry, Monomial, MultiPoly};
use super::registry::VarRegistry;
use crate::error::{Error, Result};

/// Quotient of two polynomials. Kept unreduced apart from a normalization that
/// strips common monomial factors, makes the denominator a primitive integer
/// polynomial and gives it a positive leading coefficient.
#[derive(Clone)]
pub struct RatFunc {
    num: MultiPoly,
    den: MultiPoly,
}

impl RatFunc {
    pub fn new(num: MultiPoly, den: MultiPoly) -> Result<Self> {
        if !same_registry(num.registry(), den.registry()) {
            return Err(Error::RegistryMismatch);
        }
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(Self::normalized(num, den))
    }

    pub fn from_poly(p: MultiPoly) -> Self {
        let den = MultiPoly::one(p.registry());
        RatFunc { num: p, den }
    }

    pub fn zero(reg: &Arc<VarRegistry>) -> Self {
        Self::from_poly(MultiPoly::zero(reg))
    }

    pub fn one(reg: &Arc<VarRegistry>) -> Self {
        Self::from_poly(MultiPoly::one(reg))
    }

    pub fn var(reg: &Arc<VarRegistry>, name: &str) -> Result<Self> {
        Ok(Self::from_poly(MultiPoly::var(reg, name)?))
    }

    pub fn constant(reg: &Arc<VarRegistry>, c: BigRational) -> Self {
        Self::from_poly(MultiPoly::constant(reg, c))
    }

    fn normalized(mut num: MultiPoly, mut den: MultiPoly) -> Self {
        if num.is_zero() {
            let reg = num.registry().clone();
            return RatFunc {
                num,
                den: MultiPoly::one(&reg),
            };
        }
        let g = num.monomial_content().gcd(&den.monomial_content());
        if !g.is_one() {
            num = num.div_monomial(&g);
            den = den.div_monomial(&g);
        }
        let lc_positive = den
            .leading_term()
            .map(|(_, c)| c.is_positive())
            .unwrap_or(true);
        let mut s = den.content().recip();
        if !lc_positive {
            s = -s;
        }
        if !s.is_one() {
            num = num.scale(&s);
            den = den.scale(&s);
        }
        RatFunc { num, den }
    }

    /// Divides numerator and denominator by `base` as often as both allow.
    pub fn cancel_factor(&self, base: &MultiPoly) -> Result<RatFunc> {
        if base.is_constant() || self.den.is_constant() {
            return Ok(self.clone());
        }
        let mut num = self.num.clone();
        let mut den = self.den.clone();
        let mut changed = false;
        loop {
            let Some(d) = den.try_div(base)? else { break };
            let Some(n) = num.try_div(base)? else { break };
            num = n;
            den = d;
            changed = true;
        }
        Ok(if changed {
            Self::normalized(num, den)
        } else {
            self.clone()
        })
    }

    pub fn num(&self) -> &MultiPoly {
        &self.num
    }

    pub fn den(&self) -> &MultiPoly {
        &self.den
    }

    pub fn into_parts(self) -> (MultiPoly, MultiPoly) {
        (self.num, self.den)
    }

    pub fn registry(&self) -> &Arc<VarRegistry> {
        self.num.registry()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// True when the denominator is a nonzero constant.
    pub fn is_polynomial_form(&self) -> bool {
        self.den.is_constant()
    }

    /// Returns the polynomial this function equals, if any (exact division test).
    pub fn to_poly(&self) -> Result<Option<MultiPoly>> {
        if let Some(c) = self.den.constant_value() {
            return Ok(Some(self.num.scale(&c.recip())));
        }
        self.num.try_div(&self.den)
    }

    /// If the denominator is a single monomial `c * m`, returns `(m, c)`.
    pub fn monomial_denominator(&self) -> Option<(Monomial, BigRational)> {
        if self.den.num_terms() == 1 {
            self.den.terms().next().map(|(m, c)| (m.clone(), c.clone()))
        } else {
            None
        }
    }

    fn check(&self, other: &RatFunc) -> Result<()> {
        if same_registry(self.registry(), other.registry()) {
            Ok(())
        } else {
            Err(Error::RegistryMismatch)
        }
    }

    pub fn checked_add(&self, other: &RatFunc) -> Result<RatFunc> {
        self.check(other)?;
        if self.den == other.den {
            return Ok(Self::normalized(
                self.num.checked_add(&other.num)?,
                self.den.clone(),
            ));
        }
        let (small, large) = if self.den.total_degree() <= other.den.total_degree() {
            (self, other)
        } else {
            (other, self)
        };
        if !small.den.is_constant() || !large.den.is_constant() {
            if let Some(k) = large.den.try_div(&small.den)? {
                let num = small.num.checked_mul(&k)?.checked_add(&large.num)?;
                return Ok(Self::normalized(num, large.den.clone()));
            }
        }
        let num = self
            .num
            .checked_mul(&other.den)?
            .checked_add(&other.num.checked_mul(&self.den)?)?;
        Ok(Self::normalized(num, self.den.checked_mul(&other.den)?))
    }

    pub fn checked_sub(&self, other: &RatFunc) -> Result<RatFunc> {
        self.checked_add(&-other)
    }

    pub fn checked_mul(&self, other: &RatFunc) -> Result<RatFunc> {
        self.check(other)?;
        Ok(Self::normalized(
            self.num.checked_mul(&other.num)?,
            self.den.checked_mul(&other.den)?,
        ))
    }

    pub fn checked_div(&self, other: &RatFunc) -> Result<RatFunc> {
        self.check(other)?;
        if other.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(Self::normalized(
            self.num.checked_mul(&other.den)?,
            self.den.checked_mul(&other.num)?,
        ))
    }

    pub fn scale(&self, c: &BigRational) -> RatFunc {
        Self::normalized(self.num.scale(c), self.den.clone())
    }

    pub fn mul_poly(&self, p: &MultiPoly) -> Result<RatFunc> {
        Ok(Self::normalized(self.num.checked_mul(p)?, self.den.clone()))
    }

    pub fn pow(&self, e: u32) -> Result<RatFunc> {
        Ok(Self::normalized(self.num.pow(e)?, self.den.pow(e)?))
    }

    pub fn derivative(&self, idx: usize) -> Result<RatFunc> {
        if self.den.is_constant() {
            return Ok(Self::normalized(self.num.derivative(idx), self.den.clone()));
        }
        let num = self
            .num
            .derivative(idx)
            .checked_mul(&self.den)?
            .checked_sub(&self.num.checked_mul(&self.den.derivative(idx))?)?;
        Ok(Self::normalized(num, self.den.pow(2)?))
    }

    pub fn derivative_by(&self, name: &str) -> Result<RatFunc> {
        self.derivative(self.registry().index_of(name)?)
    }

    /// Exact equality by cross-multiplication.
    pub fn equals(&self, other: &RatFunc) -> Result<bool> {
        self.check(other)?;
        if self.den == other.den {
            return Ok(self.num == other.num);
        }
        // When one denominator divides the other only the small cofactor is
        // multiplied in.
        let (small, large) = if self.den.total_degree() <= other.den.total_degree() {
            (self, other)
        } else {
            (other, self)
        };
        if let Some(k) = large.den.try_div(&small.den)? {
            return Ok(small.num.checked_mul(&k)? == large.num);
        }
        Ok(self.num.checked_mul(&other.den)? == other.num.checked_mul(&self.den)?)
    }

    pub fn eval_at(&self, values: &[(usize, BigRational)]) -> Result<RatFunc> {
        RatFunc::new(self.num.eval_at(values), self.den.eval_at(values))
    }

    pub fn to_registry(&self, target: &Arc<VarRegistry>) -> Result<RatFunc> {
        Ok(RatFunc {
            num: self.num.to_registry(target)?,
            den: self.den.to_registry(target)?,
        })
    }

    pub fn involves(&self, idx: usize) -> bool {
        self.num.involves(idx) || self.den.involves(idx)
    }
}

/// Exact equality of two rational functions (cross-multiplication).
pub fn ratfunc_equal(a: &RatFunc, b: &RatFunc) -> Result<bool> {
    a.equals(b)
}

impl PartialEq for RatFunc {
    fn eq(&self, other: &Self) -> bool {
        self.equals(other).unwrap_or(false)
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})/({})", self.num, self.den)
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatFunc{self}")
    }
}

impl From<MultiPoly> for RatFunc {
    fn from(p: MultiPoly) -> Self {
        RatFunc::from_poly(p)
    }
}

macro_rules! rf_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&RatFunc> for &RatFunc {
            type Output = RatFunc;
            fn $method(self, rhs: &RatFunc) -> RatFunc {
                self.$checked(rhs).expect("rational function arithmetic")
            }
        }
        impl $tr<RatFunc> for RatFunc {
            type Output = RatFunc;
            fn $method(self, rhs: RatFunc) -> RatFunc {
                self.$checked(&rhs).expect("rational function arithmetic")
            }
        }
    };
}

rf_binop!(Add, add, checked_add);
rf_binop!(Sub, sub, checked_sub);
rf_binop!(Mul, mul, checked_mul);
rf_binop!(Div, div, checked_div);

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl Neg for RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        -&self
    }
}
