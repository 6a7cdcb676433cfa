use super::{isqrt, Sink};
use crate::exactlat::small;
use crate::varieties::RationalPoint;

/// Isotropic vectors of `x₁xₙ = |m|²`, `m = (x₂..x_{n−1})`: scan `m` over the
/// ball `3|m|² ≤ N` (since `x₁² + xₙ² ≥ 2x₁xₙ`) and split `|m|²` into
/// divisor pairs.
pub(super) fn visit(n: usize, n2: i128, shard: usize, nshards: usize, f: &mut Sink) {
    if shard == 0 {
        for i in [0, n - 1] {
            let mut v = vec![0i64; n];
            v[i] = 1;
            f(RationalPoint::Quadric { vector: v });
        }
    }
    let smax = (n2 / 3) as usize;
    let spf = smallest_prime_factors(smax);
    let k = n - 2;
    let top = isqrt(n2 / 3);
    let mut m = vec![0i64; k];
    let mut divs = Vec::new();
    for m0 in -top..=top {
        if (m0 + top) as usize % nshards != shard {
            continue;
        }
        m[0] = m0;
        rec(&mut m, 1, (m0 as i128).pow(2), n2, &spf, &mut divs, f);
    }
}

fn rec(m: &mut [i64], idx: usize, s: i128, n2: i128, spf: &[u32], divs: &mut Vec<i64>, f: &mut Sink) {
    if idx == m.len() {
        if s == 0 {
            return;
        }
        let g = small::gcd_slice(m);
        divisors(s as usize, spf, divs);
        for &x1 in divs.iter() {
            let xn = (s / x1 as i128) as i64;
            if (x1 as i128).pow(2) + (xn as i128).pow(2) + s > n2 {
                continue;
            }
            if small::gcd(small::gcd(g, x1), xn) != 1 {
                continue;
            }
            let mut v = Vec::with_capacity(m.len() + 2);
            v.push(x1);
            v.extend_from_slice(m);
            v.push(xn);
            f(RationalPoint::Quadric { vector: v });
        }
        return;
    }
    let top = isqrt((n2 - 3 * s) / 3);
    for c in -top..=top {
        m[idx] = c;
        rec(m, idx + 1, s + (c as i128).pow(2), n2, spf, divs, f);
    }
    m[idx] = 0;
}

fn smallest_prime_factors(n: usize) -> Vec<u32> {
    let mut spf = vec![0u32; n + 1];
    for i in 2..=n {
        if spf[i] == 0 {
            for j in (i..=n).step_by(i) {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
            }
        }
    }
    spf
}

fn divisors(mut s: usize, spf: &[u32], out: &mut Vec<i64>) {
    out.clear();
    out.push(1);
    while s > 1 {
        let p = spf[s] as usize;
        let mut e = 0;
        while s % p == 0 {
            s /= p;
            e += 1;
        }
        let len = out.len();
        let mut pk = 1i64;
        for _ in 0..e {
            pk *= p as i64;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
}
