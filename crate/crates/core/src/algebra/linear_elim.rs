use num_traits::Zero;

use super::poly::MultiPoly;
use crate::error::{Error, Result};

/// Replaces `v` in `p` by the root of `f = a*v + b` and clears denominators:
/// returns `a^d * p(-b/a)` with `d = deg_v p`. When `a` is a nonzero constant
/// the result vanishes iff `f` divides `p`.
pub fn eliminate_linear(p: &MultiPoly, f: &MultiPoly, v: usize) -> Result<MultiPoly> {
    let (a, b) = linear_parts(f, v)?;
    let parts = p.split_by(v);
    let d = parts.len() - 1;
    let minus_b = -&b;
    let mut out = MultiPoly::zero(p.registry());
    let mut neg_b_pow = MultiPoly::one(p.registry());
    for (k, part) in parts.iter().enumerate() {
        if !part.is_zero() {
            let term = part
                .checked_mul(&neg_b_pow)?
                .checked_mul(&a.pow((d - k) as u32)?)?;
            out = out.checked_add(&term)?;
        }
        neg_b_pow = neg_b_pow.checked_mul(&minus_b)?;
    }
    Ok(out)
}

/// Splits `f` as `a*v + b`, checking that it is of degree one in `v` with `a`
/// free of `v`.
pub fn linear_parts(f: &MultiPoly, v: usize) -> Result<(MultiPoly, MultiPoly)> {
    let parts = f.split_by(v);
    if parts.len() != 2 || parts[1].is_zero() {
        return Err(Error::NotLinear {
            poly: f.to_string(),
            var: f.registry().name(v).to_string(),
        });
    }
    Ok((parts[1].clone(), parts[0].clone()))
}

/// The remainder of `p` modulo `f` when `f = c*v + b` with a nonzero constant
/// `c`: `p(-b/c)`, a polynomial free of `v`.
pub fn reduce_linear(p: &MultiPoly, f: &MultiPoly, v: usize) -> Result<MultiPoly> {
    let (a, b) = linear_parts(f, v)?;
    let c = a
        .constant_value()
        .filter(|c| !c.is_zero())
        .ok_or_else(|| Error::NotLinear {
            poly: f.to_string(),
            var: f.registry().name(v).to_string(),
        })?;
    let root = (-&b).scale(&c.recip());
    p.compose_var(v, &root)
}
