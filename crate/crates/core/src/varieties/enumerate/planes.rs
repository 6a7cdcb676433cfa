use super::{isqrt, Sink};
use crate::exactlat::small;
use crate::varieties::RationalPoint;

/// Planes in `Q^4` by their Hermite normal form basis
///
/// ```text
/// r1 = (0.. p1 [A..] a  [B..])
/// r2 = (0.. 0   0.. p2  [B..])
/// ```
/// with pivots in columns `c1 < c2`, `0 ≤ a < p2`. Entries are bounded by the
/// Plücker minors that become known as each entry is fixed, pruning against
/// the squared-norm budget. The minor gcd is 1 exactly for saturated bases.
pub(super) fn visit_gr24(n2: i128, shard: usize, nshards: usize, f: &mut Sink) {
    let mut counter = 0usize;
    let hmax = isqrt(n2);
    for c1 in 0..4 {
        for c2 in c1 + 1..4 {
            let ja: Vec<usize> = (c1 + 1..c2).collect();
            let jb: Vec<usize> = (c2 + 1..4).collect();
            for p1 in 1..=hmax {
                for p2 in 1..=hmax / p1 {
                    let base = (p1 as i128 * p2 as i128).pow(2);
                    if base > n2 {
                        break;
                    }
                    for a in 0..p2 {
                        counter += 1;
                        if counter % nshards != shard {
                            continue;
                        }
                        let mut ctx = Ctx { n2, c1, c2, p1, p2, a, ja: &ja, jb: &jb, r1: [0; 4], r2: [0; 4], f };
                        ctx.r1[c1] = p1;
                        ctx.r1[c2] = a;
                        ctx.r2[c2] = p2;
                        ctx.fill_r2(0, base);
                    }
                }
            }
        }
    }
}

struct Ctx<'a, 'b> {
    n2: i128,
    c1: usize,
    c2: usize,
    p1: i64,
    p2: i64,
    a: i64,
    ja: &'a [usize],
    jb: &'a [usize],
    r1: [i64; 4],
    r2: [i64; 4],
    f: &'a mut Sink<'b>,
}

impl Ctx<'_, '_> {
    /// r2 entries right of the second pivot: minor (c1, j) = p1·r2[j].
    fn fill_r2(&mut self, idx: usize, acc: i128) {
        if idx == self.jb.len() {
            return self.fill_ra(0, acc);
        }
        let j = self.jb[idx];
        let p1 = self.p1 as i128;
        let m = isqrt((self.n2 - acc) / (p1 * p1));
        for v in -m..=m {
            let add = (p1 * v as i128).pow(2);
            if acc + add > self.n2 {
                continue;
            }
            self.r2[j] = v;
            self.fill_r2(idx + 1, acc + add);
        }
        self.r2[j] = 0;
    }

    /// r1 entries between the pivots: minors (j, c2) = p2·r1[j] and
    /// (j, k) = r1[j]·r2[k] for k right of c2.
    fn fill_ra(&mut self, idx: usize, acc: i128) {
        if idx == self.ja.len() {
            return self.fill_rb(0, acc);
        }
        let j = self.ja[idx];
        let w: i128 = (self.p2 as i128).pow(2) + self.jb.iter().map(|&k| (self.r2[k] as i128).pow(2)).sum::<i128>();
        let m = isqrt((self.n2 - acc) / w);
        for v in -m..=m {
            let add = (v as i128).pow(2) * w;
            if acc + add > self.n2 {
                continue;
            }
            self.r1[j] = v;
            self.fill_ra(idx + 1, acc + add);
        }
        self.r1[j] = 0;
    }

    /// r1 entries right of c2: minor (c2, k) = a·r2[k] − p2·r1[k], plus the
    /// minors between columns right of c2.
    fn fill_rb(&mut self, idx: usize, acc: i128) {
        if idx == self.jb.len() {
            return self.emit();
        }
        let k = self.jb[idx];
        let s = isqrt(self.n2 - acc) as i128;
        let (a, p2) = (self.a as i128, self.p2 as i128);
        let t = a * self.r2[k] as i128;
        let lo = (t - s).div_euclid(p2) + if (t - s).rem_euclid(p2) == 0 { 0 } else { 1 };
        let hi = (t + s).div_euclid(p2);
        for v in lo..=hi {
            let mut add = (t - p2 * v).pow(2);
            for &kp in &self.jb[..idx] {
                add += (self.r1[kp] as i128 * self.r2[k] as i128 - v * self.r2[kp] as i128).pow(2);
            }
            if acc + add > self.n2 {
                continue;
            }
            self.r1[k] = v as i64;
            self.fill_rb(idx + 1, acc + add);
        }
        self.r1[k] = 0;
    }

    fn emit(&mut self) {
        let (r1, r2) = (self.r1, self.r2);
        let m = |i: usize, j: usize| r1[i] * r2[j] - r1[j] * r2[i];
        let plucker = vec![m(0, 1), m(0, 2), m(0, 3), m(1, 2), m(1, 3), m(2, 3)];
        if small::gcd_slice(&plucker) != 1 {
            return;
        }
        debug_assert!(self.c1 < self.c2);
        (self.f)(RationalPoint::Grassmannian { plucker, basis: vec![r1.to_vec(), r2.to_vec()] });
    }
}
