use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::{integer_rank, IntBasis, IntVec};
use crate::error::{Error, Result};

/// Row-style Hermite normal form of a basis. Unique for the lattice.
pub fn hermite_normal_form(b: &IntBasis) -> Result<IntBasis> {
    if integer_rank(&b.rows) != b.rank() {
        return Err(Error::DependentRows);
    }
    let mut rows: Vec<Vec<BigInt>> = b.rows.iter().map(|r| r.0.clone()).collect();
    let (r, d) = (rows.len(), rows[0].len());
    let mut row = 0;
    for col in 0..d {
        if row == r {
            break;
        }
        loop {
            let pick = (row..r)
                .filter(|&i| !rows[i][col].is_zero())
                .min_by(|&i, &j| rows[i][col].abs().cmp(&rows[j][col].abs()).then(i.cmp(&j)));
            let Some(p) = pick else { break };
            rows.swap(row, p);
            let mut done = true;
            for i in row + 1..r {
                if rows[i][col].is_zero() {
                    continue;
                }
                let q = rows[i][col].div_floor(&rows[row][col]);
                let pivot_row = rows[row].clone();
                for (x, y) in rows[i].iter_mut().zip(&pivot_row) {
                    *x -= &q * y;
                }
                if !rows[i][col].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if rows[row][col].is_zero() {
            continue;
        }
        if rows[row][col].is_negative() {
            rows[row].iter_mut().for_each(|x| *x = -x.clone());
        }
        let pivot_row = rows[row].clone();
        for i in 0..row {
            let q = rows[i][col].div_floor(&pivot_row[col]);
            if !q.is_zero() {
                for (x, y) in rows[i].iter_mut().zip(&pivot_row) {
                    *x -= &q * y;
                }
            }
        }
        row += 1;
    }
    IntBasis::with_denominator(rows.into_iter().map(IntVec).collect(), b.denom.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_small_version() {
        let rows = vec![vec![4i64, -6, 2, 8], vec![3, 1, -5, 2]];
        let h = hermite_normal_form(&IntBasis::from_i64_rows(&rows).unwrap()).unwrap();
        let mut small: Vec<Vec<i128>> =
            rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
        super::super::small::hnf_rows(&mut small);
        let got: Vec<Vec<i128>> =
            h.rows.iter().map(|r| r.to_i64().unwrap().iter().map(|&x| x as i128).collect()).collect();
        assert_eq!(got, small);
        assert_eq!(h.gram_determinant(), IntBasis::from_i64_rows(&rows).unwrap().gram_determinant());
    }

    #[test]
    fn dependent_rows_rejected() {
        let b = IntBasis::from_i64_rows(&[vec![1, 2], vec![2, 4]]).unwrap();
        assert_eq!(hermite_normal_form(&b), Err(Error::DependentRows));
    }
}
