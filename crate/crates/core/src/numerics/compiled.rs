//! Symbolic expressions compiled to double-double evaluation.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, ToPrimitive, Zero};
use twofloat::TwoFloat;

use crate::algebra::{MultiPoly, RatFunc};

/// Nearest double-double to an integer.
fn bigint_to_tf(n: &BigInt) -> TwoFloat {
    let hi = n.to_f64().unwrap_or(f64::NAN);
    if !hi.is_finite() {
        return TwoFloat::from(hi);
    }
    let rest = n - BigInt::from_f64(hi).expect("finite");
    TwoFloat::new_add(hi, rest.to_f64().unwrap_or(0.0))
}

pub fn rational_to_tf(r: &BigRational) -> TwoFloat {
    div(bigint_to_tf(r.numer()), bigint_to_tf(r.denom()))
}

/// Double-double quotient. twofloat's own `TwoFloat / TwoFloat` forms the
/// residual `1 - b.hi * (1 / b.hi)` without a fused multiply-add, so the
/// result is only double accurate. Division by an `f64` is exact enough, so
/// divide by `b.hi` and correct once with the residual.
pub fn div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q1 = a / b.hi();
    let r = a - q1 * b;
    q1 + r / b.hi()
}

pub fn tf(x: f64) -> TwoFloat {
    TwoFloat::from(x)
}

/// Quotient of two small integers at double-double precision.
pub fn q(n: i64, d: i64) -> TwoFloat {
    TwoFloat::from(n as f64) / d as f64
}

/// A polynomial as a flat term list over registry slots. Terms are summed in
/// the polynomial's canonical order, so evaluation is deterministic.
#[derive(Debug, Clone)]
pub struct CompiledPoly {
    terms: Vec<(TwoFloat, Vec<(usize, u32)>)>,
}

impl CompiledPoly {
    pub fn new(p: &MultiPoly) -> Self {
        let terms = p
            .terms()
            .map(|(m, c)| {
                let factors = m
                    .exps()
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| (i, e))
                    .collect();
                (rational_to_tf(c), factors)
            })
            .collect();
        CompiledPoly { terms }
    }

    /// `values` is indexed by registry slot.
    pub fn eval(&self, values: &[TwoFloat]) -> TwoFloat {
        let mut s = TwoFloat::from(0.0);
        for (c, factors) in &self.terms {
            let mut v = *c;
            for &(i, e) in factors {
                for _ in 0..e {
                    v *= values[i];
                }
            }
            s += v;
        }
        s
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct CompiledRatFunc {
    pub num: CompiledPoly,
    pub den: CompiledPoly,
}

impl CompiledRatFunc {
    pub fn new(r: &RatFunc) -> Self {
        CompiledRatFunc {
            num: CompiledPoly::new(r.num()),
            den: CompiledPoly::new(r.den()),
        }
    }

    pub fn eval(&self, values: &[TwoFloat]) -> TwoFloat {
        div(self.num.eval(values), self.den.eval(values))
    }

    pub fn den_at(&self, values: &[TwoFloat]) -> TwoFloat {
        self.den.eval(values)
    }
}

pub fn to_f64(x: TwoFloat) -> f64 {
    x.hi() + x.lo()
}

pub fn is_finite(x: TwoFloat) -> bool {
    x.hi().is_finite() && x.lo().is_finite()
}

/// Parses an integer, `a/b`, or a decimal with optional exponent, exactly.
pub fn parse_number(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().ok()?;
        let b: BigInt = b.trim().parse().ok()?;
        return (!b.is_zero()).then(|| BigRational::new(a, b));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let digits = if digits == "-" || digits == "+" {
        return None;
    } else {
        digits
    };
    let n: BigInt = digits.parse().ok()?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Some(if scale >= 0 {
        BigRational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(n, num_traits::pow(ten, (-scale) as usize))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;

    #[test]
    fn conversion_keeps_more_than_double_precision() {
        let third = rational_to_tf(&rat(1, 3));
        let err = third * tf(3.0) - tf(1.0);
        assert!(to_f64(err).abs() < 1e-30, "{err:?}");
        let big = BigRational::from_integer(BigInt::from(10).pow(20) + 1);
        assert_eq!(to_f64(rational_to_tf(&big) - tf(1e20)), 1.0);
        assert!(to_f64(q(1, 7) * tf(7.0) - tf(1.0)).abs() < 1e-30);
    }

    #[test]
    fn division_is_double_double_accurate() {
        let b = rational_to_tf(&rat(7, 3));
        let a = rational_to_tf(&rat(2, 11));
        let x = div(a, b);
        assert!(to_f64(x * b - a).abs() < 1e-31);
    }

    #[test]
    fn numbers_parse_exactly() {
        assert_eq!(parse_number("1/3"), Some(rat(1, 3)));
        assert_eq!(parse_number("0.25"), Some(rat(1, 4)));
        assert_eq!(parse_number("-1.5e-1"), Some(rat(-3, 20)));
        assert_eq!(parse_number("2e3"), Some(rat(2000, 1)));
        assert_eq!(parse_number("7"), Some(rat(7, 1)));
        assert_eq!(parse_number("1/0"), None);
        assert_eq!(parse_number("abc"), None);
        assert_eq!(parse_number("."), None);
    }
}
