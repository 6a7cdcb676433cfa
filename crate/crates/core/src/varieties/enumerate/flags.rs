use super::lines::primitive_vectors;
use super::Sink;
use crate::exactlat::small;
use crate::varieties::RationalPoint;

/// Flags `(v, w)` with `v` primitive, `w` a primitive vector of the rank-2
/// lattice `v^⊥ ∩ Z³` (Lagrange-reduced basis), `|v|² ≤ n1`, `|w|² ≤ n2`.
pub(super) fn visit(n1: i128, n2: i128, shard: usize, nshards: usize, f: &mut Sink) {
    primitive_vectors(3, n1, shard, nshards, &mut |v| {
        let line = [v[0], v[1], v[2]];
        let k = small::kernel_hnf(v);
        let (b1, b2) = lagrange([k[0][0], k[0][1], k[0][2]], [k[1][0], k[1][1], k[1][2]]);
        let g11 = small::norm2(&b1);
        let g12 = small::dot(&b1, &b2);
        let g22 = small::norm2(&b2);
        let det = g11 * g22 - g12 * g12;
        // n² det / g11 ≤ Q(m, n) for every m
        let nmax = ((n2 as f64 * g11 as f64 / det as f64).sqrt() + 1.0) as i64;
        for nn in 0..=nmax {
            let (mlo, mhi) = if nn == 0 {
                (1, 1)
            } else {
                let c = -(g12 as f64) * nn as f64 / g11 as f64;
                let rem = n2 as f64 * g11 as f64 - det as f64 * (nn as f64).powi(2);
                if rem < -1.0 {
                    continue;
                }
                let w = rem.max(0.0).sqrt() / g11 as f64;
                ((c - w).floor() as i64 - 1, (c + w).ceil() as i64 + 1)
            };
            for m in mlo..=mhi {
                let (mi, ni) = (m as i128, nn as i128);
                if g11 * mi * mi + 2 * g12 * mi * ni + g22 * ni * ni > n2 || small::gcd(m, nn) != 1 {
                    continue;
                }
                let mut w = [0i64; 3];
                for i in 0..3 {
                    w[i] = m * b1[i] + nn * b2[i];
                }
                if !small::sign_canonical(&w) {
                    w = [-w[0], -w[1], -w[2]];
                }
                f(RationalPoint::Flag { line, plane: w });
            }
        }
    });
}

/// Gauss–Lagrange reduction of a rank-2 basis.
fn lagrange(mut a: [i64; 3], mut b: [i64; 3]) -> ([i64; 3], [i64; 3]) {
    if small::norm2(&a) > small::norm2(&b) {
        std::mem::swap(&mut a, &mut b);
    }
    loop {
        let na = small::norm2(&a);
        let q = round_div(small::dot(&a, &b), na);
        for i in 0..3 {
            b[i] -= (q as i64) * a[i];
        }
        if small::norm2(&b) >= na {
            return (a, b);
        }
        std::mem::swap(&mut a, &mut b);
    }
}

fn round_div(x: i128, y: i128) -> i128 {
    (2 * x + y).div_euclid(2 * y)
}
