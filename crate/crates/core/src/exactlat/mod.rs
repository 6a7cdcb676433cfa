//! Exact integer lattice arithmetic: primitive vectors, LLL, Hermite normal
//! form and successive minima.

mod hnf;
mod lll;
mod minima;
pub mod small;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use hnf::hermite_normal_form;
pub use lll::{lll_reduce, lll_reduce_with_transform, DEFAULT_DELTA};
pub use minima::{shortest_vectors, successive_minima, Minima, EXACT_MINIMA_MAX_RANK};

/// Integer vector with arbitrary-precision coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IntVec(pub Vec<BigInt>);

impl IntVec {
    pub fn from_i64(coords: &[i64]) -> Self {
        IntVec(coords.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        IntVec(vec![BigInt::zero(); dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    pub fn dot(&self, other: &IntVec) -> BigInt {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm2(&self) -> BigInt {
        self.dot(self)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        use num_traits::ToPrimitive;
        self.0.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()
    }

    /// Returns the coordinates as `i64` if all of them fit.
    pub fn to_i64(&self) -> Option<Vec<i64>> {
        use num_traits::ToPrimitive;
        self.0.iter().map(|c| c.to_i64()).collect()
    }

    fn axpy(&mut self, q: &BigInt, other: &IntVec) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a -= q * b;
        }
    }
}

/// Basis of a lattice `(1/denom)·span_Z(rows)`; `denom` is positive.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntBasis {
    pub rows: Vec<IntVec>,
    pub denom: BigInt,
}

impl IntBasis {
    pub fn new(rows: Vec<IntVec>) -> Result<Self> {
        Self::with_denominator(rows, BigInt::one())
    }

    pub fn with_denominator(rows: Vec<IntVec>, denom: BigInt) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidParameter("basis has no rows".into()));
        }
        let dim = rows[0].dim();
        if dim == 0 {
            return Err(Error::InvalidParameter("basis rows are empty".into()));
        }
        if let Some(r) = rows.iter().find(|r| r.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: r.dim() });
        }
        if !denom.is_positive() {
            return Err(Error::InvalidParameter("denominator must be positive".into()));
        }
        Ok(IntBasis { rows, denom })
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Result<Self> {
        Self::new(rows.iter().map(|r| IntVec::from_i64(r)).collect())
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.rows[0].dim()
    }

    /// Gram matrix of the integer rows (ignores `denom`).
    pub fn gram(&self) -> Vec<Vec<BigInt>> {
        self.rows.iter().map(|a| self.rows.iter().map(|b| a.dot(b)).collect()).collect()
    }

    /// Determinant of the Gram matrix of the integer rows.
    pub fn gram_determinant(&self) -> BigInt {
        bareiss_det(self.gram())
    }
}

/// `v / gcd(v)` with the first nonzero coordinate made positive.
pub fn normalize_primitive(v: &IntVec) -> Result<IntVec> {
    let g = v.0.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    if g.is_zero() {
        return Err(Error::ZeroVector);
    }
    let first_negative = v.0.iter().find(|c| !c.is_zero()).is_some_and(|c| c.is_negative());
    let g = if first_negative { -g } else { g };
    Ok(IntVec(v.0.iter().map(|c| c / &g).collect()))
}

/// Determinant of a square integer matrix by fraction-free elimination.
pub fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// Rank of a set of integer vectors (fraction-free elimination).
pub fn integer_rank(rows: &[IntVec]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let mut m: Vec<Vec<BigInt>> = rows.iter().map(|r| r.0.clone()).collect();
    let (nr, nc) = (m.len(), m[0].len());
    let mut rank = 0;
    for col in 0..nc {
        let Some(p) = (rank..nr).find(|&i| !m[i][col].is_zero()) else { continue };
        m.swap(rank, p);
        for i in rank + 1..nr {
            if m[i][col].is_zero() {
                continue;
            }
            let (a, b) = (m[rank][col].clone(), m[i][col].clone());
            for j in col..nc {
                let v = &m[i][j] * &a - &m[rank][j] * &b;
                m[i][j] = v;
            }
        }
        rank += 1;
        if rank == nr {
            break;
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn primitive_examples() {
        let p = |v: &[i64]| normalize_primitive(&IntVec::from_i64(v)).unwrap().to_i64().unwrap();
        assert_eq!(p(&[6, 9]), vec![2, 3]);
        assert_eq!(p(&[0, -5]), vec![0, 1]);
        assert_eq!(p(&[3, 4]), vec![3, 4]);
        assert_eq!(normalize_primitive(&IntVec::zeros(3)), Err(Error::ZeroVector));
    }

    #[test]
    fn determinant_and_rank() {
        let m = [vec![2, 0, 1], vec![1, 3, 2], vec![1, 1, 1]];
        let big: Vec<Vec<BigInt>> =
            m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        // 2(3-2) - 0 + 1(1-3) = 0
        assert_eq!(bareiss_det(big), BigInt::zero());
        let rows: Vec<IntVec> = m.iter().map(|r| IntVec::from_i64(r)).collect();
        assert_eq!(integer_rank(&rows), 2);
    }

    proptest! {
        #[test]
        fn primitive_properties(v in prop::collection::vec(-1000i64..1000, 1..6)) {
            prop_assume!(v.iter().any(|&c| c != 0));
            let iv = IntVec::from_i64(&v);
            let p = normalize_primitive(&iv).unwrap();
            prop_assert_eq!(normalize_primitive(&p).unwrap(), p.clone());
            let g = p.0.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
            prop_assert!(g.is_one());
            prop_assert!(p.0.iter().find(|c| !c.is_zero()).unwrap().is_positive());
            // proportional: all 2x2 minors vanish
            for i in 0..v.len() {
                for j in 0..v.len() {
                    prop_assert_eq!(&iv.0[i] * &p.0[j], &iv.0[j] * &p.0[i]);
                }
            }
        }
    }
}
