//! Small dense linear algebra in double-double and `f64`.

use twofloat::TwoFloat;

pub type DD = TwoFloat;

#[inline]
pub fn dd(x: f64) -> DD {
    TwoFloat::from(x)
}

#[inline]
pub fn ddi(x: i64) -> DD {
    TwoFloat::from(x)
}

/// `a / b` to double-double accuracy. twofloat's own `TwoFloat / TwoFloat`
/// drops the low word of the quotient (the residual `1 − b·(1/b)` is formed
/// without an fma), so every quotient of two DD values goes through here.
pub fn div_dd(a: DD, b: DD) -> DD {
    let q1 = a.hi() / b.hi();
    let r = a - b * q1;
    let q2 = r.hi() / b.hi();
    let r = r - b * q2;
    let q3 = r.hi() / b.hi();
    (dd(q1) + q2) + q3
}

pub fn dot_dd(a: &[DD], b: &[DD]) -> DD {
    a.iter().zip(b).fold(dd(0.0), |s, (x, y)| s + *x * *y)
}

pub fn norm_dd(a: &[DD]) -> DD {
    dot_dd(a, a).sqrt()
}

pub fn normalize_dd(a: &[DD]) -> Vec<DD> {
    let n = norm_dd(a);
    a.iter().map(|x| div_dd(*x, n)).collect()
}

pub fn to_f64(a: &[DD]) -> Vec<f64> {
    a.iter().map(|x| x.hi()).collect()
}

/// Orthonormal basis of R^d whose first vectors span `leading` (in order),
/// completed by standard basis vectors. Completion picks, at each step, the
/// coordinate vector with the largest residual (lowest index on ties).
/// Returns the vectors (they are the frame columns).
pub fn orthonormal_completion(leading: &[Vec<DD>], d: usize) -> Vec<Vec<DD>> {
    let mut out: Vec<Vec<DD>> = Vec::with_capacity(d);
    for v in leading {
        let r = residual(v, &out);
        out.push(normalize_dd(&r));
    }
    while out.len() < d {
        let mut best: Option<(f64, Vec<DD>)> = None;
        for i in 0..d {
            let e: Vec<DD> = (0..d).map(|j| dd(if i == j { 1.0 } else { 0.0 })).collect();
            let r = residual(&e, &out);
            let n = norm_dd(&r).hi();
            if best.as_ref().is_none_or(|(bn, _)| n > *bn + 1e-12) {
                best = Some((n, r));
            }
        }
        let (_, r) = best.expect("d > 0");
        out.push(normalize_dd(&r));
    }
    out
}

/// Component of `v` orthogonal to the orthonormal family `basis`
/// (two passes of modified Gram–Schmidt).
pub fn residual(v: &[DD], basis: &[Vec<DD>]) -> Vec<DD> {
    let mut r = v.to_vec();
    for _ in 0..2 {
        for b in basis {
            let c = dot_dd(&r, b);
            for (x, y) in r.iter_mut().zip(b) {
                *x -= c * *y;
            }
        }
    }
    r
}

/// Determinant of a small square `f64` matrix given by rows.
pub fn det_f64(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut a = m.to_vec();
    let mut det = 1.0;
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).expect("n > 0");
        if a[p][k] == 0.0 {
            return 0.0;
        }
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        det *= a[k][k];
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    det
}

/// Solves `m x = rhs` for a small square system by partial pivoting.
pub fn solve_f64(m: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.iter().zip(rhs).map(|(r, &b)| r.iter().copied().chain([b]).collect()).collect();
    let scale = m.iter().flatten().fold(0.0f64, |s, x| s.max(x.abs()));
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[p][k].abs() <= 1e-14 * scale {
            return None;
        }
        a.swap(p, k);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..=n {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (a[k][n] - s) / a[k][k];
    }
    Some(x)
}
