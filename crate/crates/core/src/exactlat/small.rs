//! Fixed-width helpers for the enumeration hot loops.

#[inline]
pub fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

pub fn gcd_slice(v: &[i64]) -> i64 {
    v.iter().fold(0, |g, &c| gcd(g, c))
}

/// True when the first nonzero coordinate is positive.
#[inline]
pub fn sign_canonical(v: &[i64]) -> bool {
    v.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)
}

/// Divides by the gcd and fixes the sign; `None` for the zero vector.
pub fn primitive(v: &[i64]) -> Option<Vec<i64>> {
    let mut g = gcd_slice(v);
    if g == 0 {
        return None;
    }
    if !sign_canonical(v) {
        g = -g;
    }
    Some(v.iter().map(|&c| c / g).collect())
}

pub fn norm2(v: &[i64]) -> i128 {
    v.iter().map(|&c| (c as i128) * (c as i128)).sum()
}

pub fn dot(a: &[i64], b: &[i64]) -> i128 {
    a.iter().zip(b).map(|(&x, &y)| x as i128 * y as i128).sum()
}

/// Extended gcd: returns `(g, x, y)` with `a x + b y = g >= 0`.
pub fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// Row Hermite normal form of a full-row-rank matrix: pivots positive,
/// entries above a pivot reduced into `[0, pivot)`.
pub fn hnf_rows(rows: &mut [Vec<i128>]) {
    let r = rows.len();
    if r == 0 {
        return;
    }
    let d = rows[0].len();
    let mut row = 0;
    for col in 0..d {
        if row == r {
            break;
        }
        loop {
            let pick = (row..r)
                .filter(|&i| rows[i][col] != 0)
                .min_by_key(|&i| (rows[i][col].abs(), i));
            let Some(p) = pick else { break };
            rows.swap(row, p);
            let mut done = true;
            for i in row + 1..r {
                if rows[i][col] != 0 {
                    let q = rows[i][col].div_euclid(rows[row][col]);
                    let (head, tail) = rows.split_at_mut(i);
                    for (x, y) in tail[0].iter_mut().zip(&head[row]) {
                        *x -= q * y;
                    }
                    if tail[0][col] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if rows[row][col] == 0 {
            continue;
        }
        if rows[row][col] < 0 {
            rows[row].iter_mut().for_each(|x| *x = -*x);
        }
        let piv = rows[row][col];
        for i in 0..row {
            let q = rows[i][col].div_euclid(piv);
            if q != 0 {
                let (head, tail) = rows.split_at_mut(row);
                for (x, y) in head[i].iter_mut().zip(&tail[0]) {
                    *x -= q * y;
                }
            }
        }
        row += 1;
    }
}

/// Basis of the integer kernel `{x ∈ Z^d : n·x = 0}` of a nonzero vector,
/// returned in Hermite normal form.
pub fn kernel_hnf(n: &[i64]) -> Vec<Vec<i64>> {
    let d = n.len();
    // Column operations reducing n to (g, 0, ..., 0); the transformed identity
    // columns 1.. span the kernel.
    let mut v: Vec<i128> = n.iter().map(|&c| c as i128).collect();
    let mut u: Vec<Vec<i128>> = (0..d).map(|i| (0..d).map(|j| (i == j) as i128).collect()).collect();
    // Move a nonzero entry to the front.
    let first = v.iter().position(|&c| c != 0).expect("nonzero normal vector");
    v.swap(0, first);
    for row in u.iter_mut() {
        row.swap(0, first);
    }
    for j in 1..d {
        if v[j] == 0 {
            continue;
        }
        let (g, x, y) = ext_gcd(v[0], v[j]);
        let (a, b) = (v[0] / g, v[j] / g);
        // new col0 = x col0 + y colj ; new colj = -b col0 + a colj  (det 1)
        for row in u.iter_mut() {
            let (c0, cj) = (row[0], row[j]);
            row[0] = x * c0 + y * cj;
            row[j] = -b * c0 + a * cj;
        }
        v[0] = g;
        v[j] = 0;
    }
    let mut rows: Vec<Vec<i128>> = (1..d).map(|j| u.iter().map(|row| row[j]).collect()).collect();
    hnf_rows(&mut rows);
    rows.into_iter().map(|r| r.into_iter().map(|x| x as i64).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_is_saturated_and_orthogonal() {
        for n in [vec![1i64, 2, 3], vec![0, 0, 5], vec![4, 6, 10], vec![3, -7, 2, 5]] {
            let prim = primitive(&n).unwrap();
            let k = kernel_hnf(&prim);
            assert_eq!(k.len(), n.len() - 1);
            for r in &k {
                assert_eq!(dot(r, &prim), 0);
            }
            // covolume of a saturated kernel equals |n| (Gram det = |n|^2)
            let basis = crate::exactlat::IntBasis::from_i64_rows(&k).unwrap();
            assert_eq!(basis.gram_determinant(), num_bigint::BigInt::from(norm2(&prim)));
        }
    }

    #[test]
    fn hnf_canonical() {
        let mut a = vec![vec![2i128, 4, 6], vec![1, 3, 5]];
        let mut b = vec![vec![3i128, 7, 11], vec![2, 4, 6]]; // unimodular image
        hnf_rows(&mut a);
        hnf_rows(&mut b);
        assert_eq!(a, b);
        assert_eq!(a, vec![vec![1, 1, 1], vec![0, 2, 4]]);
    }
}

/// Basis of `{x ∈ Z^d : r·x = 0 for every row r}` (Hermite normal form).
pub fn integer_kernel(rows: &[Vec<i64>], d: usize) -> Vec<Vec<i64>> {
    // Column reduction A·U = [H | 0]; the trailing columns of U span the kernel.
    let mut a: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut u: Vec<Vec<i128>> = (0..d).map(|i| (0..d).map(|j| (i == j) as i128).collect()).collect();
    let mut piv_col = 0;
    for row in 0..a.len() {
        if piv_col == d {
            break;
        }
        let Some(first) = (piv_col..d).find(|&j| a[row][j] != 0) else { continue };
        swap_cols(&mut a, &mut u, piv_col, first);
        for j in piv_col + 1..d {
            if a[row][j] == 0 {
                continue;
            }
            let (g, x, y) = ext_gcd(a[row][piv_col], a[row][j]);
            let (p, q) = (a[row][piv_col] / g, a[row][j] / g);
            for m in [&mut a, &mut u] {
                for r in m.iter_mut() {
                    let (c0, cj) = (r[piv_col], r[j]);
                    r[piv_col] = x * c0 + y * cj;
                    r[j] = -q * c0 + p * cj;
                }
            }
        }
        piv_col += 1;
    }
    let mut k: Vec<Vec<i128>> = (piv_col..d).map(|j| u.iter().map(|r| r[j]).collect()).collect();
    hnf_rows(&mut k);
    k.into_iter().map(|r| r.into_iter().map(|x| x as i64).collect()).collect()
}

fn swap_cols(a: &mut [Vec<i128>], u: &mut [Vec<i128>], i: usize, j: usize) {
    for r in a.iter_mut().chain(u.iter_mut()) {
        r.swap(i, j);
    }
}

/// Saturation `span_Q(rows) ∩ Z^d` of independent integer rows, in Hermite
/// normal form.
pub fn saturate(rows: &[Vec<i64>], d: usize) -> Vec<Vec<i64>> {
    let k = integer_kernel(rows, d);
    if k.is_empty() {
        return (0..d).map(|i| (0..d).map(|j| (i == j) as i64).collect()).collect();
    }
    integer_kernel(&k, d)
}
