//! Sparse exact linear systems over the rationals. Rows are stored as
//! primitive integer vectors; elimination is fraction-free with content
//! removal after every combination.

use std::collections::{BTreeMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Sorted `(column, coefficient)` pairs with no zero entries.
type SparseRow = Vec<(usize, BigInt)>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Row {
    coeffs: SparseRow,
    rhs: BigInt,
}

impl Row {
    /// Scales to a primitive integer row whose leading coefficient is positive.
    fn normalize(mut self) -> Row {
        let mut g = self.rhs.abs();
        for (_, c) in &self.coeffs {
            g = g.gcd(c);
        }
        if g.is_zero() {
            return self;
        }
        let negative = match self.coeffs.first() {
            Some((_, c)) => c.is_negative(),
            None => self.rhs.is_negative(),
        };
        if negative {
            g = -g;
        }
        if !g.is_one() {
            for (_, c) in self.coeffs.iter_mut() {
                *c /= &g;
            }
            self.rhs /= &g;
        }
        self
    }

    fn lead(&self) -> Option<(usize, &BigInt)> {
        self.coeffs.first().map(|(j, c)| (*j, c))
    }

    /// `a*self - b*other`.
    fn combine(&self, a: &BigInt, other: &Row, b: &BigInt) -> Row {
        let mut out = Vec::with_capacity(self.coeffs.len() + other.coeffs.len());
        let (mut i, mut k) = (0, 0);
        while i < self.coeffs.len() || k < other.coeffs.len() {
            let ci = self.coeffs.get(i).map(|x| x.0);
            let ck = other.coeffs.get(k).map(|x| x.0);
            let (col, val) = match (ci, ck) {
                (Some(x), Some(y)) if x == y => {
                    let v = a * &self.coeffs[i].1 - b * &other.coeffs[k].1;
                    i += 1;
                    k += 1;
                    (x, v)
                }
                (Some(x), Some(y)) if x < y => {
                    i += 1;
                    (x, a * &self.coeffs[i - 1].1)
                }
                (Some(x), None) => {
                    i += 1;
                    (x, a * &self.coeffs[i - 1].1)
                }
                (_, Some(y)) => {
                    k += 1;
                    (y, -(b * &other.coeffs[k - 1].1))
                }
                (None, None) => unreachable!(),
            };
            if !val.is_zero() {
                out.push((col, val));
            }
        }
        Row {
            coeffs: out,
            rhs: a * &self.rhs - b * &other.rhs,
        }
        .normalize()
    }
}

/// Solution set `particular + span(nullspace)`.
#[derive(Debug, Clone)]
pub struct AffineSolution {
    pub particular: Vec<BigRational>,
    pub nullspace: Vec<Vec<BigRational>>,
    pub pivots: Vec<usize>,
}

impl AffineSolution {
    pub fn dimension(&self) -> usize {
        self.nullspace.len()
    }
}

/// Linear equations `sum_j a_ij x_j = b_i` in a fixed number of unknowns.
#[derive(Debug, Clone)]
pub struct ExactLinearSystem {
    num_unknowns: usize,
    rows: Vec<Row>,
    seen: HashSet<Row>,
}

impl ExactLinearSystem {
    pub fn new(num_unknowns: usize) -> Self {
        ExactLinearSystem {
            num_unknowns,
            rows: Vec::new(),
            seen: HashSet::new(),
        }
    }

    pub fn num_unknowns(&self) -> usize {
        self.num_unknowns
    }

    /// Number of distinct nonzero rows.
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Adds `sum coeffs = rhs`. Zero rows are dropped when consistent and
    /// kept (so that `solve` fails) otherwise; duplicates are dropped.
    pub fn add_row(
        &mut self,
        coeffs: impl IntoIterator<Item = (usize, BigRational)>,
        rhs: BigRational,
    ) -> Result<()> {
        let mut acc: BTreeMap<usize, BigRational> = BTreeMap::new();
        for (j, c) in coeffs {
            if j >= self.num_unknowns {
                return Err(Error::InvalidInput(format!("unknown {j} out of range")));
            }
            *acc.entry(j).or_insert_with(BigRational::zero) += c;
        }
        acc.retain(|_, c| !c.is_zero());
        if acc.is_empty() && rhs.is_zero() {
            return Ok(());
        }
        let mut l = rhs.denom().clone();
        for c in acc.values() {
            l = l.lcm(c.denom());
        }
        let scale = |c: &BigRational| (c * BigRational::from_integer(l.clone())).to_integer();
        let row = Row {
            coeffs: acc.iter().map(|(j, c)| (*j, scale(c))).collect(),
            rhs: scale(&rhs),
        }
        .normalize();
        if self.seen.insert(row.clone()) {
            self.rows.push(row);
        }
        Ok(())
    }

    /// Sum of `coeffs[j] * x[j] - rhs` for a candidate `x`.
    pub fn residuals(&self, x: &[BigRational]) -> Vec<BigRational> {
        self.rows
            .iter()
            .map(|r| {
                let mut s = -BigRational::from_integer(r.rhs.clone());
                for (j, c) in &r.coeffs {
                    s += &x[*j] * BigRational::from_integer(c.clone());
                }
                s
            })
            .filter(|s| !s.is_zero())
            .collect()
    }

    pub fn is_satisfied_by(&self, x: &[BigRational]) -> bool {
        self.residuals(x).is_empty()
    }

    /// Exact affine solution set; `Error::Inconsistent` if there is none.
    pub fn solve(&self) -> Result<AffineSolution> {
        let mut echelon: BTreeMap<usize, Row> = BTreeMap::new();
        let mut order: Vec<&Row> = self.rows.iter().collect();
        order.sort_by_key(|r| r.coeffs.len());
        for row in order {
            let mut r = row.clone();
            while let Some((col, lead)) = r.lead() {
                match echelon.get(&col) {
                    Some(p) => {
                        let pl = p.lead().expect("pivot row").1.clone();
                        let g = pl.gcd(lead);
                        let a = &pl / &g;
                        let b = lead / &g;
                        r = r.combine(&a, p, &b);
                    }
                    None => break,
                }
            }
            match r.lead() {
                Some((col, _)) => {
                    echelon.insert(col, r);
                }
                None if !r.rhs.is_zero() => {
                    return Err(Error::Inconsistent("linear system has no solution".into()));
                }
                None => {}
            }
        }

        // Back substitution: each pivot as constant + combination of free unknowns.
        let n = self.num_unknowns;
        let mut reduced: BTreeMap<usize, (BigRational, BTreeMap<usize, BigRational>)> =
            BTreeMap::new();
        for (&c, row) in echelon.iter().rev() {
            let lead = BigRational::from_integer(row.coeffs[0].1.clone());
            let mut constant = BigRational::from_integer(row.rhs.clone()) / &lead;
            let mut free: BTreeMap<usize, BigRational> = BTreeMap::new();
            for (j, a) in &row.coeffs[1..] {
                let f = BigRational::from_integer(a.clone()) / &lead;
                match reduced.get(j) {
                    Some((k, deps)) => {
                        constant -= &f * k;
                        for (fj, v) in deps {
                            *free.entry(*fj).or_insert_with(BigRational::zero) -= &f * v;
                        }
                    }
                    None => {
                        *free.entry(*j).or_insert_with(BigRational::zero) -= f;
                    }
                }
            }
            free.retain(|_, v| !v.is_zero());
            reduced.insert(c, (constant, free));
        }

        let mut particular = vec![BigRational::zero(); n];
        for (&c, (k, _)) in &reduced {
            particular[c] = k.clone();
        }
        let mut nullspace = Vec::new();
        for f in (0..n).filter(|j| !reduced.contains_key(j)) {
            let mut v = vec![BigRational::zero(); n];
            v[f] = BigRational::one();
            for (&c, (_, deps)) in &reduced {
                if let Some(x) = deps.get(&f) {
                    v[c] = x.clone();
                }
            }
            nullspace.push(v);
        }
        Ok(AffineSolution {
            particular,
            nullspace,
            pivots: reduced.keys().copied().collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{int, rat};

    #[test]
    fn unique_solution() {
        // x + y = 3, x - y = 1
        let mut s = ExactLinearSystem::new(2);
        s.add_row([(0, int(1)), (1, int(1))], int(3)).unwrap();
        s.add_row([(0, int(1)), (1, int(-1))], int(1)).unwrap();
        let sol = s.solve().unwrap();
        assert_eq!(sol.particular, vec![int(2), int(1)]);
        assert_eq!(sol.dimension(), 0);
    }

    #[test]
    fn nullspace_and_duplicates() {
        // x + 2y - z = 0 twice, scaled
        let mut s = ExactLinearSystem::new(3);
        s.add_row([(0, int(1)), (1, int(2)), (2, int(-1))], int(0))
            .unwrap();
        s.add_row([(0, rat(1, 2)), (1, int(1)), (2, rat(-1, 2))], int(0))
            .unwrap();
        assert_eq!(s.num_rows(), 1);
        let sol = s.solve().unwrap();
        assert_eq!(sol.dimension(), 2);
        for v in &sol.nullspace {
            let mut shifted = v.clone();
            for (a, b) in shifted.iter_mut().zip(&sol.particular) {
                *a += b;
            }
            assert!(s.is_satisfied_by(&shifted));
        }
    }

    #[test]
    fn inconsistent() {
        let mut s = ExactLinearSystem::new(1);
        s.add_row([(0, int(2))], int(1)).unwrap();
        s.add_row([(0, int(4))], int(3)).unwrap();
        assert!(matches!(s.solve(), Err(Error::Inconsistent(_))));
        let mut z = ExactLinearSystem::new(1);
        z.add_row([(0, int(0))], int(1)).unwrap();
        assert!(z.solve().is_err());
    }

    #[test]
    fn out_of_range_unknown() {
        let mut s = ExactLinearSystem::new(1);
        assert!(s.add_row([(3, int(1))], int(0)).is_err());
    }
}
