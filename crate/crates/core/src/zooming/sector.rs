//! Exact scans of narrow cones around a point of the projective line.
//!
//! For a center `x` of Gr(1,2) and a closed predicate on the chart value
//! `z(v)`, the points `v = ±(a, b)` (a on the dominant axis of `x`, `a > 0`)
//! satisfying it form, for each `a`, an interval of `b`: `z` is a Möbius
//! function of `b` without pole inside the cone. Interval endpoints come from
//! solving for `b` and are then settled with the exact same floating
//! predicate the cloud path uses, so both paths agree point for point.

use crate::exactlat::small;
use crate::heights::{le_bound, log_height};
use crate::varieties::line_chart;

/// Largest `n` with `log_height(n) ≤ t` under the shared closed predicate.
pub fn max_norm2_in_cap(t: f64) -> i128 {
    if !le_bound(0.0, t) {
        return 0;
    }
    let mut n = (2.0 * t).exp().min(1e30).floor().max(1.0) as i128;
    while le_bound(log_height(n + 1), t) {
        n += 1;
    }
    while n > 1 && !le_bound(log_height(n), t) {
        n -= 1;
    }
    n
}

pub(crate) struct Cone<'a> {
    frame: &'a [Vec<f64>],
    axis: usize,
    /// chart interval `[zl, zh]` used only to locate endpoints
    zl: f64,
    zh: f64,
}

impl<'a> Cone<'a> {
    /// `None` when the cone is too wide for the per-axis scan (chart radius
    /// above 1/2).
    pub(crate) fn new(frame: &'a [Vec<f64>], zl: f64, zh: f64) -> Option<Self> {
        if !(zl <= zh) || zl.abs().max(zh.abs()) > 0.5 {
            return None;
        }
        let axis = if frame[0][0].abs() >= frame[0][1].abs() { 0 } else { 1 };
        Some(Cone { frame, axis, zl, zh })
    }

    #[inline]
    fn vec(&self, a: i64, b: i64) -> [f64; 2] {
        if self.axis == 0 { [a as f64, b as f64] } else { [b as f64, a as f64] }
    }

    /// `b` with `z(a, b) = z`.
    fn solve(&self, a: f64, z: f64) -> f64 {
        let (s0, s1) = (&self.frame[0], &self.frame[1]);
        let (i, j) = if self.axis == 0 { (0, 1) } else { (1, 0) };
        a * (z * s0[i] - s1[i]) / (s1[j] - z * s0[j])
    }

    /// Calls `f(a, B1, B2)` for every `a ≥ 1` with nonempty exact interval
    /// `[B1, B2]` of `b` satisfying `pred(z)` and `a² + b² ≤ n2`. The axis
    /// point `a = 0` is reported as `f(0, 1, 1)` when it qualifies.
    pub(crate) fn scan(&self, n2: i128, pred: &dyn Fn(f64) -> bool, f: &mut dyn FnMut(i64, i64, i64)) {
        let zp = |a: i64, b: i64| {
            let mut z = [0.0];
            line_chart(self.frame, &self.vec(a, b), &mut z) && pred(z[0])
        };
        if n2 >= 1 && zp(0, 1) {
            f(0, 1, 1);
        }
        let amax = crate::varieties::enumerate::isqrt(n2);
        for a in 1..=amax {
            let hb = crate::varieties::enumerate::isqrt(n2 - (a as i128) * (a as i128));
            let (e1, e2) = {
                let (p, q) = (self.solve(a as f64, self.zl), self.solve(a as f64, self.zh));
                (p.min(q), p.max(q))
            };
            if !(e1.is_finite() && e2.is_finite()) || e2 < (-hb - 2) as f64 || e1 > (hb + 2) as f64 {
                continue;
            }
            let (lim_lo, lim_hi) = ((e1.floor() as i64 - 2).max(-hb - 1), (e2.ceil() as i64 + 2).min(hb + 1));
            let mut lo = lim_lo;
            while lo > -hb && zp(a, lo) {
                lo -= 1;
            }
            while lo <= lim_hi && !zp(a, lo) {
                lo += 1;
            }
            if lo > lim_hi {
                continue;
            }
            let mut hi = lim_hi.max(lo);
            while hi < hb && zp(a, hi) {
                hi += 1;
            }
            while hi >= lo && !zp(a, hi) {
                hi -= 1;
            }
            let (b1, b2) = (lo.max(-hb), hi.min(hb));
            if b1 <= b2 {
                f(a, b1, b2);
            }
        }
    }

    /// Canonical (sign-normalized) integer vector for the pair `(a, b)`.
    pub(crate) fn point(&self, a: i64, b: i64) -> Vec<i64> {
        let v = if self.axis == 0 { vec![a, b] } else { vec![b, a] };
        if small::sign_canonical(&v) { v } else { v.iter().map(|x| -x).collect() }
    }
}

/// Möbius function and squarefree divisors by smallest-prime-factor sieve.
pub(crate) struct Divisors {
    spf: Vec<u32>,
}

impl Divisors {
    pub(crate) fn new(n: usize) -> Self {
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
        Divisors { spf }
    }

    /// Squarefree divisors `d` of `n` with `μ(d)`.
    pub(crate) fn squarefree(&self, mut n: usize, out: &mut Vec<(i64, i64)>) {
        out.clear();
        out.push((1, 1));
        while n > 1 {
            let p = self.spf[n] as usize;
            while n % p == 0 {
                n /= p;
            }
            let len = out.len();
            for i in 0..len {
                let (d, m) = out[i];
                out.push((d * p as i64, -m));
            }
        }
    }
}

/// Number of `b ∈ [b1, b2]` coprime to `a`.
pub(crate) fn coprime_in_range(divs: &[(i64, i64)], b1: i64, b2: i64) -> i64 {
    divs.iter().map(|&(d, mu)| mu * (b2.div_euclid(d) - (b1 - 1).div_euclid(d))).sum()
}
