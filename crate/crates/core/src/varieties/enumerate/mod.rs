//! Exact enumeration of rational points of bounded height.
//!
//! Work is split into a fixed number of shards (independent of the thread
//! count); shard results are merged in shard order, so every output is
//! deterministic.

mod flags;
mod lines;
mod planes;
mod quadric;

use std::cmp::Ordering;

use rayon::prelude::*;

use super::{Family, RationalPoint, VarietyDescriptor};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct EnumConfig {
    /// Abort before enumerating when the predicted count exceeds this.
    pub max_points: u64,
    pub shards: usize,
}

impl Default for EnumConfig {
    fn default() -> Self {
        EnumConfig { max_points: 20_000_000, shards: 64 }
    }
}

/// Region in which a point set is known to be complete.
#[derive(Clone, Debug, PartialEq)]
pub enum Coverage {
    /// Every point with heights ≤ `hmax`.
    Full,
    /// Every point with heights ≤ `hmax` whose chart at the center with this
    /// frame has quasi-norm ≤ `radius`.
    Chart { frame: Vec<Vec<f64>>, radius: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    pub desc: VarietyDescriptor,
    pub hmax: Vec<f64>,
    pub coverage: Coverage,
    /// Canonical order.
    pub points: Vec<RationalPoint>,
}

/// Largest integer `N` with `sqrt(N) ≤ h` (as evaluated in `f64`).
pub fn norm_bound(h: f64) -> i128 {
    if h.is_nan() || h < 1.0 {
        return 0;
    }
    let mut n = (h * h).floor() as i128;
    while ((n + 1) as f64).sqrt() <= h {
        n += 1;
    }
    while n > 0 && (n as f64).sqrt() > h {
        n -= 1;
    }
    n
}

pub(crate) fn isqrt(n: i128) -> i64 {
    if n <= 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as i128;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r as i64
}

fn unit_ball_volume(d: usize) -> f64 {
    use std::f64::consts::PI;
    match d {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        4 => PI * PI / 2.0,
        5 => 8.0 * PI * PI / 15.0,
        6 => PI.powi(3) / 6.0,
        _ => unreachable!("dimension ≤ 6"),
    }
}

/// Rough upper estimate of the number of points below `hmax`, used for the
/// budget check.
pub fn predicted_count(desc: &VarietyDescriptor, hmax: &[f64]) -> f64 {
    let h = hmax[0].max(1.0);
    match desc.family {
        Family::Grassmannian { l, d } if l == 1 || l == d - 1 => unit_ball_volume(d) * h.powi(d as i32) / 2.0 + 10.0,
        Family::Grassmannian { .. } => 7.0 * h.powi(4) + 10.0,
        Family::SplitQuadric { n } => 2.0 * h.powi(n as i32 - 2) * (1.0 + h.ln()) + 10.0,
        Family::FullFlag3 => {
            let h2 = hmax[1].max(1.0);
            3.0 * h * h * h2 * h2 + 10.0
        }
    }
}

pub(crate) type Sink<'a> = dyn FnMut(RationalPoint) + 'a;

fn visit_shard(desc: &VarietyDescriptor, bounds: &[i128], shard: usize, nshards: usize, f: &mut Sink) {
    match desc.family {
        Family::Grassmannian { l: 1, d } => lines::visit(d, bounds[0], shard, nshards, f),
        Family::Grassmannian { l, d } if l == d - 1 => lines::visit_hyperplanes(d, bounds[0], shard, nshards, f),
        Family::Grassmannian { .. } => planes::visit_gr24(bounds[0], shard, nshards, f),
        Family::SplitQuadric { n } => quadric::visit(n, bounds[0], shard, nshards, f),
        Family::FullFlag3 => flags::visit(bounds[0], bounds[1], shard, nshards, f),
    }
}

fn validate(desc: &VarietyDescriptor, hmax: &[f64], cfg: &EnumConfig) -> Result<Vec<i128>> {
    if hmax.len() != desc.pic_rank {
        return Err(Error::DimensionMismatch { expected: desc.pic_rank, got: hmax.len() });
    }
    if hmax.iter().any(|h| !h.is_finite()) {
        return Err(Error::InvalidParameter("height bounds must be finite".into()));
    }
    if cfg.shards == 0 {
        return Err(Error::InvalidParameter("shard count must be positive".into()));
    }
    let predicted = predicted_count(desc, hmax);
    if predicted > cfg.max_points as f64 {
        return Err(Error::BudgetExceeded { predicted, cap: cfg.max_points });
    }
    Ok(hmax.iter().map(|&h| norm_bound(h)).collect())
}

/// Folds every point with heights ≤ `hmax` into per-shard accumulators, then
/// merges them in shard order.
pub fn fold_points<A, I, V, M>(
    desc: &VarietyDescriptor,
    hmax: &[f64],
    cfg: &EnumConfig,
    init: I,
    visit: V,
    merge: M,
) -> Result<A>
where
    A: Send,
    I: Fn() -> A + Sync,
    V: Fn(&mut A, RationalPoint) + Sync,
    M: Fn(&mut A, A),
{
    let bounds = validate(desc, hmax, cfg)?;
    let parts: Vec<A> = (0..cfg.shards)
        .into_par_iter()
        .map(|s| {
            let mut acc = init();
            if bounds.iter().all(|&b| b >= 1) {
                visit_shard(desc, &bounds, s, cfg.shards, &mut |p| visit(&mut acc, p));
            }
            acc
        })
        .collect();
    let mut it = parts.into_iter();
    let mut acc = it.next().expect("at least one shard");
    for p in it {
        merge(&mut acc, p);
    }
    Ok(acc)
}

/// Canonical order: squared norms, then the integer representative.
pub fn canonical_cmp(a: &RationalPoint, b: &RationalPoint) -> Ordering {
    a.norms2().cmp(&b.norms2()).then_with(|| match (a, b) {
        (
            RationalPoint::Grassmannian { plucker: pa, basis: ba },
            RationalPoint::Grassmannian { plucker: pb, basis: bb },
        ) => pa.cmp(pb).then_with(|| ba.cmp(bb)),
        (RationalPoint::Quadric { vector: va }, RationalPoint::Quadric { vector: vb }) => va.cmp(vb),
        (RationalPoint::Flag { line: la, plane: na }, RationalPoint::Flag { line: lb, plane: nb }) => {
            la.cmp(lb).then_with(|| na.cmp(nb))
        }
        _ => a.rep_coords().cmp(&b.rep_coords()),
    })
}

/// All points with every height ≤ the matching entry of `hmax`, each once,
/// in canonical order.
pub fn enumerate_points(desc: &VarietyDescriptor, hmax: &[f64], cfg: &EnumConfig) -> Result<PointSet> {
    let mut points = fold_points(
        desc,
        hmax,
        cfg,
        Vec::new,
        |acc: &mut Vec<RationalPoint>, p| acc.push(p),
        |acc, mut other| acc.append(&mut other),
    )?;
    points.par_sort_unstable_by(canonical_cmp);
    points.dedup();
    Ok(PointSet { desc: desc.clone(), hmax: hmax.to_vec(), coverage: Coverage::Full, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlat::small;

    fn gr(l: usize, d: usize) -> VarietyDescriptor {
        VarietyDescriptor::grassmannian(l, d).unwrap()
    }

    fn reps(set: &PointSet) -> Vec<Vec<i64>> {
        set.points.iter().map(|p| p.rep_coords()).collect()
    }

    #[test]
    fn norm_bound_edges() {
        assert_eq!(norm_bound(5f64.sqrt() + 1e-9), 5);
        assert_eq!(norm_bound(2.2360680), 5);
        assert_eq!(norm_bound(0.5), 0);
        assert_eq!(norm_bound(1.0), 1);
        assert_eq!(isqrt(99), 9);
        assert_eq!(isqrt(100), 10);
    }

    #[test]
    fn projective_line_example() {
        let set = enumerate_points(&gr(1, 2), &[5f64.sqrt() + 1e-9], &EnumConfig::default()).unwrap();
        let mut got: Vec<Vec<i64>> = set.points.iter().map(|p| match p {
            RationalPoint::Grassmannian { plucker, .. } => plucker.clone(),
            _ => unreachable!(),
        }).collect();
        got.sort();
        let mut want = vec![vec![1, 0], vec![0, 1], vec![1, 1], vec![1, -1], vec![1, 2], vec![2, 1], vec![1, -2], vec![2, -1]];
        want.sort();
        assert_eq!(got, want);
        // oracle: exhaustive gcd scan of the box
        let mut oracle = Vec::new();
        for a in -3i64..=3 {
            for b in -3i64..=3 {
                if small::gcd(a, b) == 1 && small::sign_canonical(&[a, b]) && a * a + b * b <= 5 {
                    oracle.push(vec![a, b]);
                }
            }
        }
        oracle.sort();
        assert_eq!(got, oracle);
    }

    #[test]
    fn coordinate_planes() {
        let set = enumerate_points(&gr(2, 4), &[1.0], &EnumConfig::default()).unwrap();
        assert_eq!(set.points.len(), 6);
        for p in &set.points {
            let RationalPoint::Grassmannian { plucker, .. } = p else { unreachable!() };
            assert_eq!(small::norm2(plucker), 1);
        }
    }

    #[test]
    fn tiny_bounds_are_empty() {
        let cfg = EnumConfig::default();
        for desc in [gr(1, 2), gr(2, 4), gr(3, 4), VarietyDescriptor::split_quadric(4).unwrap()] {
            assert!(enumerate_points(&desc, &[0.5], &cfg).unwrap().points.is_empty());
        }
        let f = VarietyDescriptor::full_flag3();
        assert!(enumerate_points(&f, &[0.5, 10.0], &cfg).unwrap().points.is_empty());
    }

    /// Brute force over all integer l×d matrices with small entries.
    fn brute_grassmannian(l: usize, d: usize, h: f64, entry: i64) -> Vec<Vec<i64>> {
        let nb = norm_bound(h);
        let cells = l * d;
        let span = (2 * entry + 1) as usize;
        let mut out = std::collections::BTreeSet::new();
        let mut idx = vec![0usize; cells];
        loop {
            let m: Vec<Vec<i64>> = (0..l).map(|r| (0..d).map(|c| idx[r * d + c] as i64 - entry).collect()).collect();
            let minors: Vec<i64> = crate::varieties::point::plucker_minors(&m).iter().map(|&x| x as i64).collect();
            if let Some(p) = small::primitive(&minors) {
                if small::norm2(&p) <= nb {
                    out.insert(RationalPoint::subspace(&m).unwrap().rep_coords());
                }
            }
            let mut k = 0;
            loop {
                if k == cells {
                    return out.into_iter().collect();
                }
                idx[k] += 1;
                if idx[k] < span {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    #[test]
    fn grassmannians_match_brute_force() {
        let cfg = EnumConfig { shards: 7, ..Default::default() };
        for (l, d, h, entry) in [(2usize, 4usize, 2.5f64, 2i64), (2, 3, 4.0, 4), (3, 4, 1.8, 1), (1, 3, 4.5, 4)] {
            let set = enumerate_points(&gr(l, d), &[h], &cfg).unwrap();
            let mut got = reps(&set);
            got.sort();
            let want = brute_grassmannian(l, d, h, entry);
            assert_eq!(got, want, "Gr({l},{d})");
            // HNF entries are bounded by the height bound
            for p in &set.points {
                let RationalPoint::Grassmannian { basis, .. } = p else { unreachable!() };
                assert!(basis.iter().flatten().all(|&x| (x as f64).abs() <= h));
                assert!(p.check_invariants(&gr(l, d)));
            }
        }
    }

    #[test]
    fn quadric_matches_brute_force() {
        let desc = VarietyDescriptor::split_quadric(4).unwrap();
        let set = enumerate_points(&desc, &[12.0], &EnumConfig { shards: 5, ..Default::default() }).unwrap();
        let mut got = reps(&set);
        got.sort();
        let mut want = Vec::new();
        for a in -12i64..=12 {
            for b in -12i64..=12 {
                for c in -12i64..=12 {
                    for e in -12i64..=12 {
                        let v = [a, b, c, e];
                        if small::norm2(&v) <= 144 && small::gcd_slice(&v) == 1 && small::sign_canonical(&v) && a * e == b * b + c * c {
                            want.push(v.to_vec());
                        }
                    }
                }
            }
        }
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn flags_match_brute_force() {
        let desc = VarietyDescriptor::full_flag3();
        let set = enumerate_points(&desc, &[3.0, 4.0], &EnumConfig { shards: 3, ..Default::default() }).unwrap();
        let mut got = reps(&set);
        got.sort();
        let mut want = Vec::new();
        let r = -4i64..=4;
        for v in itertools_product(r.clone()) {
            if small::norm2(&v) > 9 || small::gcd_slice(&v) != 1 || !small::sign_canonical(&v) {
                continue;
            }
            for w in itertools_product(r.clone()) {
                if small::norm2(&w) <= 16 && small::gcd_slice(&w) == 1 && small::sign_canonical(&w) && small::dot(&v, &w) == 0 {
                    want.push(v.iter().chain(&w).copied().collect::<Vec<i64>>());
                }
            }
        }
        want.sort();
        assert_eq!(got, want);
    }

    fn itertools_product(r: std::ops::RangeInclusive<i64>) -> Vec<[i64; 3]> {
        let mut out = Vec::new();
        for a in r.clone() {
            for b in r.clone() {
                for c in r.clone() {
                    out.push([a, b, c]);
                }
            }
        }
        out
    }

    #[test]
    fn independent_of_shards_and_monotone() {
        for desc in [gr(1, 3), gr(2, 4), gr(3, 4), VarietyDescriptor::split_quadric(5).unwrap(), VarietyDescriptor::full_flag3()] {
            let h = if desc.pic_rank == 2 { vec![6.0, 7.0] } else { vec![7.0] };
            let small_h: Vec<f64> = h.iter().map(|x| x - 2.0).collect();
            let a = enumerate_points(&desc, &h, &EnumConfig { shards: 1, ..Default::default() }).unwrap();
            let b = enumerate_points(&desc, &h, &EnumConfig { shards: 13, ..Default::default() }).unwrap();
            assert_eq!(a.points, b.points, "{desc}");
            let c = enumerate_points(&desc, &small_h, &EnumConfig::default()).unwrap();
            let big: std::collections::HashSet<_> = a.points.iter().collect();
            assert!(c.points.iter().all(|p| big.contains(p)));
            assert!(a.points.iter().all(|p| p.check_invariants(&desc)));
            assert!(a.points.windows(2).all(|w| canonical_cmp(&w[0], &w[1]) == Ordering::Less));
        }
    }

    #[test]
    fn budget_is_enforced() {
        let cfg = EnumConfig { max_points: 1000, shards: 4 };
        assert!(matches!(enumerate_points(&gr(1, 3), &[100.0], &cfg), Err(Error::BudgetExceeded { .. })));
    }
}
