use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{IntBasis, IntVec};
use crate::error::{Error, Result};

pub const DEFAULT_DELTA: f64 = 0.75;

/// LLL-reduces a basis with exact integer arithmetic.
pub fn lll_reduce(b: &IntBasis, delta: f64) -> Result<IntBasis> {
    lll_reduce_with_transform(b, delta).map(|(r, _)| r)
}

/// As [`lll_reduce`], also returning the unimodular `U` with
/// `reduced.rows[i] = Σ_j U[i][j]·b.rows[j]`.
///
/// Integral variant of the algorithm: only Gram–Schmidt determinants `d_i`
/// and the scaled coefficients `λ_{k,j} = d_{j+1} μ_{k,j}` are stored, so
/// every intermediate quantity is an integer.
pub fn lll_reduce_with_transform(b: &IntBasis, delta: f64) -> Result<(IntBasis, Vec<IntVec>)> {
    if !(delta > 0.25 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("LLL delta {delta} outside (0.25, 1)")));
    }
    let n = b.rank();
    if n > 8 {
        return Err(Error::RankTooLarge(n));
    }
    let dq = BigRational::from_float(delta).expect("finite delta");
    let (dp, dd) = (dq.numer().clone(), dq.denom().clone());

    let mut basis: Vec<IntVec> = b.rows.clone();
    let mut u: Vec<IntVec> = (0..n)
        .map(|i| IntVec((0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()))
        .collect();
    let mut d: Vec<BigInt> = vec![BigInt::zero(); n + 1];
    let mut lam: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); n]; n];
    d[0] = BigInt::one();
    d[1] = basis[0].norm2();
    if d[1].is_zero() {
        return Err(Error::DependentRows);
    }
    if n == 1 {
        return Ok((IntBasis::with_denominator(basis, b.denom.clone())?, u));
    }

    let mut k = 1usize;
    let mut kmax = 0usize;
    loop {
        if k > kmax {
            kmax = k;
            for j in 0..=k {
                let mut acc = basis[k].dot(&basis[j]);
                for i in 0..j {
                    acc = (&d[i + 1] * &acc - &lam[k][i] * &lam[j][i]) / &d[i];
                }
                if j < k {
                    lam[k][j] = acc;
                } else {
                    if acc.is_zero() {
                        return Err(Error::DependentRows);
                    }
                    d[k + 1] = acc;
                }
            }
        }
        reduce(k, k - 1, &mut basis, &mut u, &mut lam, &d);
        // Lovász: d_{k+1} d_{k-1} >= δ d_k^2 - λ_{k,k-1}^2, scaled by the denominator of δ.
        let lhs = &dd * (&d[k + 1] * &d[k - 1]);
        let rhs = &dp * (&d[k] * &d[k]) - &dd * (&lam[k][k - 1] * &lam[k][k - 1]);
        if lhs < rhs {
            swap(k, kmax, &mut basis, &mut u, &mut lam, &mut d);
            k = k.saturating_sub(1).max(1);
        } else {
            for l in (0..k.saturating_sub(1)).rev() {
                reduce(k, l, &mut basis, &mut u, &mut lam, &d);
            }
            k += 1;
            if k == n {
                break;
            }
        }
    }
    Ok((IntBasis::with_denominator(basis, b.denom.clone())?, u))
}

fn reduce(k: usize, l: usize, b: &mut [IntVec], u: &mut [IntVec], lam: &mut [Vec<BigInt>], d: &[BigInt]) {
    let dl = &d[l + 1];
    let two_lam: BigInt = &lam[k][l] * 2;
    if two_lam.abs() <= *dl {
        return;
    }
    // nearest integer to λ/d, ties rounded up
    let q = (two_lam + dl).div_floor(&(dl * 2));
    let bl = b[l].clone();
    b[k].axpy(&q, &bl);
    let ul = u[l].clone();
    u[k].axpy(&q, &ul);
    lam[k][l] -= &q * dl;
    for i in 0..l {
        let v = &q * &lam[l][i];
        lam[k][i] -= v;
    }
}

fn swap(k: usize, kmax: usize, b: &mut [IntVec], u: &mut [IntVec], lam: &mut [Vec<BigInt>], d: &mut [BigInt]) {
    b.swap(k, k - 1);
    u.swap(k, k - 1);
    for j in 0..k - 1 {
        let t = lam[k][j].clone();
        lam[k][j] = lam[k - 1][j].clone();
        lam[k - 1][j] = t;
    }
    let l = lam[k][k - 1].clone();
    let big_b = (&d[k - 1] * &d[k + 1] + &l * &l) / &d[k];
    for i in k + 1..=kmax {
        let t = lam[i][k].clone();
        lam[i][k] = (&d[k + 1] * &lam[i][k - 1] - &l * &t) / &d[k];
        lam[i][k - 1] = (&big_b * &t + &l * &lam[i][k]) / &d[k + 1];
    }
    d[k] = big_b;
}
