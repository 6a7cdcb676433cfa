use super::{isqrt, Sink};
use crate::exactlat::small;
use crate::varieties::point::plucker_minors;
use crate::varieties::RationalPoint;

/// Primitive sign-canonical vectors of `Z^d` with squared norm ≤ `n2`; the
/// shard owns the first coordinates congruent to it.
pub(super) fn primitive_vectors(d: usize, n2: i128, shard: usize, nshards: usize, f: &mut dyn FnMut(&[i64])) {
    fn rec(v: &mut [i64], idx: usize, rem: i128, g: i64, all_zero: bool, f: &mut dyn FnMut(&[i64])) {
        if idx == v.len() {
            if !all_zero && g == 1 {
                f(v);
            }
            return;
        }
        let m = isqrt(rem);
        let lo = if all_zero { 0 } else { -m };
        for c in lo..=m {
            v[idx] = c;
            rec(v, idx + 1, rem - (c as i128) * (c as i128), small::gcd(g, c), all_zero && c == 0, f);
        }
        v[idx] = 0;
    }
    let mut v = vec![0i64; d];
    let top = isqrt(n2);
    for c0 in (shard as i64..=top).step_by(nshards) {
        v[0] = c0;
        rec(&mut v, 1, n2 - (c0 as i128) * (c0 as i128), c0, c0 == 0, f);
    }
}

pub(super) fn visit(d: usize, n2: i128, shard: usize, nshards: usize, f: &mut Sink) {
    primitive_vectors(d, n2, shard, nshards, &mut |v| {
        f(RationalPoint::Grassmannian { plucker: v.to_vec(), basis: vec![v.to_vec()] })
    });
}

/// Hyperplanes `n^⊥` via their primitive normals: the Plücker vector of a
/// saturated hyperplane lattice is the normal up to signs and order, so the
/// height is `|n|`.
pub(super) fn visit_hyperplanes(d: usize, n2: i128, shard: usize, nshards: usize, f: &mut Sink) {
    primitive_vectors(d, n2, shard, nshards, &mut |n| {
        let basis = small::kernel_hnf(n);
        let minors: Vec<i64> = plucker_minors(&basis).into_iter().map(|m| m as i64).collect();
        let plucker = small::primitive(&minors).expect("hyperplane has nonzero minors");
        f(RationalPoint::Grassmannian { plucker, basis })
    });
}
