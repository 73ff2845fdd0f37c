//! Seeded random rational parameter values.

use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::systems::HamiltonianSystem;

pub const DEFAULT_SEED: u64 = 20_240_615;

/// Nonzero rational with numerator and denominator bounded by 100.
pub fn random_rational(rng: &mut impl Rng) -> BigRational {
    loop {
        let n: i64 = rng.gen_range(-100..=100);
        let d: i64 = rng.gen_range(1..=100);
        if n != 0 {
            return BigRational::new(n.into(), d.into());
        }
    }
}

/// `count` parameter assignments (registry index, value) for `sys`. Parameters
/// in `free` are left out. When the system has a normalization and nothing is
/// free, the highest parameter is fixed by it. Assignments with a zero
/// parameter are rejected and redrawn.
pub fn alpha_samples(
    sys: &HamiltonianSystem,
    count: usize,
    seed: u64,
    free: &[usize],
) -> Vec<Vec<(usize, BigRational)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = sys.params();
    let derived = if free.is_empty() {
        sys.relation_target()
    } else {
        None
    };
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut sample: Vec<(usize, BigRational)> = params
            .iter()
            .filter(|a| !free.contains(a) && Some(**a) != derived)
            .map(|&a| (a, random_rational(&mut rng)))
            .collect();
        if let (Some(target), Some(n)) = (derived, sys.normalization.clone()) {
            let rest = sample.iter().fold(n, |acc, (_, v)| acc - v);
            if rest.is_zero() {
                continue;
            }
            sample.push((target, rest));
            sample.sort_by_key(|(a, _)| *a);
        }
        out.push(sample);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{build_system, SystemKind};

    #[test]
    fn samples_satisfy_the_normalization() {
        let sys = build_system(SystemKind::D5);
        for s in alpha_samples(&sys, 5, 7, &[]) {
            assert_eq!(s.len(), 5);
            let sum = s.iter().fold(BigRational::zero(), |a, (_, v)| a + v);
            assert_eq!(sum, sys.normalization.clone().unwrap());
            assert!(s.iter().all(|(_, v)| !v.is_zero()));
        }
    }

    #[test]
    fn seeded_and_free_parameters_skipped() {
        let sys = build_system(SystemKind::D3);
        let a2 = sys.registry.index_of("alpha2").unwrap();
        let a = alpha_samples(&sys, 3, 1, &[a2]);
        assert_eq!(a, alpha_samples(&sys, 3, 1, &[a2]));
        assert!(a
            .iter()
            .all(|s| s.len() == 2 && s.iter().all(|(i, _)| *i != a2)));
        assert_ne!(a, alpha_samples(&sys, 3, 2, &[a2]));
    }
}
