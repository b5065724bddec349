//! Weight vectors: a point of the simplex of d nonnegative weights summing
//! to one, with the derived data the winning-strategy machinery needs (the
//! sorted view and the multiplicity `t` of the leading weight).

use crate::error::{Error, Result};
use crate::precision::{Real, DEFAULT_PRECISION};
use crate::rational::{rat_i, rat_to_string};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};

/// Exact-rational weight vector. Stored in the caller's coordinate order;
/// `sorted_desc` gives the descending view used by strategy derivations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightVector {
    entries: Vec<BigRational>,
    strict: bool,
}

impl WeightVector {
    /// Validates membership in the weight simplex. Entries must be
    /// nonnegative; a sum differing from 1 by at most `2^-(P-8)` (default
    /// precision) is renormalized exactly, anything further off is rejected.
    pub fn new(entries: Vec<BigRational>) -> Result<WeightVector> {
        if entries.is_empty() {
            return Err(Error::InvalidWeights("empty weight vector".into()));
        }
        if entries.len() > 6 {
            return Err(Error::InvalidWeights(format!(
                "dimension {} exceeds supported bound 6",
                entries.len()
            )));
        }
        for (i, w) in entries.iter().enumerate() {
            if w.is_negative() {
                return Err(Error::InvalidWeights(format!(
                    "w_{} = {} is negative",
                    i + 1,
                    rat_to_string(w)
                )));
            }
        }
        let sum: BigRational = entries.iter().sum();
        let entries = if sum.is_one() {
            entries
        } else {
            let dev = (&sum - BigRational::one()).abs();
            // 2^-(P-8) as an exact rational.
            let tol = BigRational::new(
                BigInt::one(),
                BigInt::one() << (DEFAULT_PRECISION - 8) as u32,
            );
            if dev > tol {
                return Err(Error::InvalidWeights(format!(
                    "sum is {}, not 1",
                    rat_to_string(&sum)
                )));
            }
            entries.into_iter().map(|w| w / &sum).collect()
        };
        let strict = entries.iter().all(|w| w.is_positive());
        Ok(WeightVector { entries, strict })
    }

    /// Equal weights (1/d, ..., 1/d).
    pub fn equal(d: usize) -> WeightVector {
        let w = BigRational::new(BigInt::one(), BigInt::from(d as i64));
        WeightVector::new(vec![w; d]).expect("equal weights are valid")
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    /// All weights strictly positive (required by the winning strategy).
    pub fn is_strict(&self) -> bool {
        self.strict
    }

    pub fn entries(&self) -> &[BigRational] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> &BigRational {
        &self.entries[i]
    }

    pub fn entries_real(&self, p: usize) -> Vec<Real> {
        self.entries
            .iter()
            .map(|w| Real::from_rational(w, p))
            .collect()
    }

    /// Descending weights plus the permutation mapping sorted position to
    /// original coordinate. Ties break by original index, so the permutation
    /// is deterministic.
    pub fn sorted_desc(&self) -> (Vec<BigRational>, Vec<usize>) {
        let mut idx: Vec<usize> = (0..self.entries.len()).collect();
        idx.sort_by(|&a, &b| {
            self.entries[b]
                .cmp(&self.entries[a])
                .then(a.cmp(&b))
        });
        let sorted = idx.iter().map(|&i| self.entries[i].clone()).collect();
        (sorted, idx)
    }

    /// Largest weight.
    pub fn w_max(&self) -> BigRational {
        self.entries.iter().max().cloned().expect("nonempty")
    }

    /// Smallest weight.
    pub fn w_min(&self) -> BigRational {
        self.entries.iter().min().cloned().expect("nonempty")
    }

    /// Multiplicity of the leading weight: with the sorted view
    /// w_1 >= ... >= w_d, the count t with w_1 = ... = w_t > w_{t+1}
    /// (taking w_{d+1} = 0).
    pub fn t_leading(&self) -> usize {
        let top = self.w_max();
        self.entries.iter().filter(|w| **w == top).count()
    }

    /// The weight w_{t+1} in the sorted view, or 0 when t = d.
    pub fn w_after_leading(&self) -> BigRational {
        let (sorted, _) = self.sorted_desc();
        let t = self.t_leading();
        if t < sorted.len() {
            sorted[t].clone()
        } else {
            rat_i(0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn accepts_valid_and_rejects_invalid() {
        let w = WeightVector::new(vec![rat(2, 3), rat(1, 3)]).unwrap();
        assert!(w.is_strict());
        assert_eq!(w.dim(), 2);
        assert!(WeightVector::new(vec![rat(1, 2), rat(1, 3)]).is_err());
        assert!(WeightVector::new(vec![rat(3, 2), rat(-1, 2)]).is_err());
        assert!(WeightVector::new(vec![]).is_err());
        let z = WeightVector::new(vec![rat_i(1), rat_i(0)]).unwrap();
        assert!(!z.is_strict());
    }

    #[test]
    fn leading_multiplicity_and_successor() {
        let w = WeightVector::new(vec![rat(2, 3), rat(1, 3)]).unwrap();
        assert_eq!(w.t_leading(), 1);
        assert_eq!(w.w_after_leading(), rat(1, 3));

        let eq = WeightVector::equal(2);
        assert_eq!(eq.t_leading(), 2);
        assert_eq!(eq.w_after_leading(), rat_i(0));

        let w3 = WeightVector::new(vec![rat(2, 5), rat(2, 5), rat(1, 5)]).unwrap();
        assert_eq!(w3.t_leading(), 2);
        assert_eq!(w3.w_after_leading(), rat(1, 5));
    }

    #[test]
    fn sorting_is_stable_and_permutation_consistent() {
        let w = WeightVector::new(vec![rat(1, 5), rat(2, 5), rat(2, 5)]).unwrap();
        let (sorted, perm) = w.sorted_desc();
        assert_eq!(sorted, vec![rat(2, 5), rat(2, 5), rat(1, 5)]);
        assert_eq!(perm, vec![1, 2, 0]);
        for (pos, &orig) in perm.iter().enumerate() {
            assert_eq!(&sorted[pos], w.get(orig));
        }
    }

    #[test]
    fn tiny_deviation_renormalizes_large_rejects() {
        let tol_den = num_bigint::BigInt::from(1) << 260u32;
        let eps = BigRational::new(num_bigint::BigInt::from(1), tol_den);
        let w = WeightVector::new(vec![rat(1, 2) + &eps, rat(1, 2)]).unwrap();
        let sum: BigRational = w.entries().iter().sum();
        assert!(sum.is_one());
    }
}
