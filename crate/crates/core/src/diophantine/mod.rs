//! Best-approximation records, empirical Diophantine exponents and rational
//! Schubert genericity scans.

mod genericity;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::counting::log_linear_fit;
use crate::error::{Error, Result};
use crate::exactlat::small;
use crate::numeric::{ddi, div_dd, DD};
use crate::varieties::enumerate::{canonical_cmp, isqrt, norm_bound};
use crate::varieties::{distance, enumerate_points, EnumConfig, Family, RationalPoint, RealPoint, VarietyDescriptor};

pub use genericity::{schubert_genericity, GenericityReport, Violation, ViolationKind, DEFAULT_TOL};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordEntry {
    #[serde(rename = "H")]
    pub h: f64,
    pub d: f64,
    /// Integer representative of the approximating point.
    pub point: Vec<i64>,
}

/// Record-setting approximations: `h` strictly increasing, `d` strictly
/// decreasing.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ApproxRecord {
    pub entries: Vec<RecordEntry>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaEstimate {
    /// Least-squares slope of `−log d` against `log H`.
    pub slope: f64,
    /// `max −log d / log H` over the records used.
    pub max_ratio: f64,
    pub used: usize,
}

fn point_distance(x: &RealPoint, p: &RationalPoint) -> Result<f64> {
    match (x.family, p) {
        (Family::Grassmannian { l: 1, .. }, RationalPoint::Grassmannian { basis, .. }) => {
            crate::varieties::line_distance_dd(x, &basis[0])
        }
        _ => distance(x, p),
    }
}

/// The spanning vector for lines, the full representative otherwise.
fn record_point(p: &RationalPoint) -> Vec<i64> {
    match p {
        RationalPoint::Grassmannian { basis, .. } if basis.len() == 1 => basis[0].clone(),
        _ => p.rep_coords(),
    }
}

/// Strict distance records of `points` in height order. Ties in height go to
/// the closest point, then to the first in canonical order; the input order
/// is irrelevant. Points outside the chart of `x` and the point `x` itself
/// (for rational centers) are skipped.
pub fn best_approx_records(x: &RealPoint, points: &[RationalPoint]) -> Result<ApproxRecord> {
    if let Some(p) = points.iter().find(|p| p.norms2().len() != 1) {
        return Err(Error::UnsupportedFamily(format!("records need a single height, got {} heights", p.norms2().len())));
    }
    let mut sorted: Vec<&RationalPoint> = points.iter().filter(|p| x.rational.as_ref() != Some(*p)).collect();
    sorted.sort_by(|a, b| canonical_cmp(a, b));
    let cands = sorted
        .into_iter()
        .filter_map(|p| match point_distance(x, p) {
            Ok(d) => Some(Ok((p.norms2()[0], d, record_point(p)))),
            Err(Error::NotInChart) => None,
            Err(e) => Some(Err(e)),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(scan_records(cands))
}

/// `cands` in canonical order: (norm², distance, representative).
fn scan_records(cands: Vec<(i128, f64, Vec<i64>)>) -> ApproxRecord {
    let mut entries: Vec<RecordEntry> = Vec::new();
    let mut i = 0;
    while i < cands.len() {
        let n2 = cands[i].0;
        let mut best = i;
        let mut j = i + 1;
        while j < cands.len() && cands[j].0 == n2 {
            if cands[j].1 < cands[best].1 {
                best = j;
            }
            j += 1;
        }
        let (_, d, ref v) = cands[best];
        if entries.last().is_none_or(|e| d < e.d) {
            entries.push(RecordEntry { h: (n2 as f64).sqrt(), d, point: v.clone() });
        }
        i = j;
    }
    ApproxRecord { entries }
}

/// Half-width of the strip `|c₁| ≤ W` around a line of Gr(1,2) holding every
/// record beyond the small-height block.
///
/// By Minkowski, a record `v` with `|c₀(v)| ≥ 4.5` has `|c₁(v)| ≤ 2.23`: the
/// box `|c₀| ≤ |c₀(v)|/2, |c₁| ≤ 2/|c₀(v)|` holds a lower, closer point
/// otherwise. Below that, points past the block are at most 0.15 from `x`
/// (Dirichlet at height 7), so `|c₁| < 0.7`. For a rational center of
/// height `h₀` every record with `c₀ > 2h₀` lies on the two lines
/// `c₁ = ±1/h₀`.
const STRIP: f64 = 2.5;

/// Records of the points of Gr(1,2) with height ≤ `hmax` around `x`,
/// without enumerating the whole height ball: only the strip `|c₁| ≤ 2.5`
/// and the block of heights ≤ `max(2h₀ + 4, 10)` can hold records.
pub fn line_records(x: &RealPoint, hmax: f64) -> Result<ApproxRecord> {
    if x.family != (Family::Grassmannian { l: 1, d: 2 }) {
        return Err(Error::UnsupportedFamily("strip records are specific to Gr(1,2)".into()));
    }
    let nmax = norm_bound(hmax);
    if nmax < 1 {
        return Ok(ApproxRecord::default());
    }
    let own: Option<[i64; 2]> = match &x.rational {
        Some(RationalPoint::Grassmannian { basis, .. }) => Some([basis[0][0], basis[0][1]]),
        _ => None,
    };
    let h0 = own.map_or(0.0, |v| (small::norm2(&v) as f64).sqrt());
    let block = norm_bound((2.0 * h0 + 4.0).max(10.0)).min(nmax);
    let f = x.frame();
    let sd = x.frame_dd();
    let axis = if f[0][0].abs() >= f[0][1].abs() { 0 } else { 1 };
    let place = |a: i64, b: i64| {
        let v = if axis == 0 { [a, b] } else { [b, a] };
        if small::sign_canonical(&v) { v } else { [-v[0], -v[1]] }
    };

    let dist = |v: [i64; 2]| -> Option<f64> {
        let (a, b) = (ddi(v[0]), ddi(v[1]));
        let c0: DD = sd[0][0] * a + sd[0][1] * b;
        let c1: DD = sd[1][0] * a + sd[1][1] * b;
        (c0.hi() != 0.0).then(|| div_dd(c1.abs(), c0.abs()).hi())
    };
    let keep = |v: [i64; 2]| -> bool {
        let n2 = small::norm2(&v);
        n2 <= nmax && small::gcd(v[0], v[1]) == 1 && small::sign_canonical(&v) && Some(v) != own
    };

    let mut cands: Vec<(i128, f64, [i64; 2])> = Vec::new();
    let r = isqrt(block);
    for a in -r..=r {
        for b in -r..=r {
            let v = [a, b];
            if small::norm2(&v) <= block && keep(v) {
                if let Some(d) = dist(v) {
                    cands.push((small::norm2(&v), d, v));
                }
            }
        }
    }
    // the strip, scanned along the dominant axis of x
    let (i, j) = (axis, 1 - axis);
    let (si, sj) = (f[1][i], f[1][j]);
    let amax = isqrt(nmax);
    let strip: Vec<(i128, f64, [i64; 2])> = (1..=amax)
        .into_par_iter()
        .flat_map_iter(|a| {
            let lo = (-STRIP - si * a as f64) / sj;
            let hi = (STRIP - si * a as f64) / sj;
            let (lo, hi) = (lo.min(hi).floor() as i64 - 1, lo.max(hi).ceil() as i64 + 1);
            (lo..=hi).filter_map(move |b| {
                let v = place(a, b);
                let n2 = small::norm2(&v);
                (n2 > block && keep(v)).then_some(v).and_then(|v| dist(v).map(|d| (n2, d, v)))
            })
        })
        .collect();
    cands.extend(strip);
    cands.par_sort_unstable_by(|p, q| p.0.cmp(&q.0).then_with(|| p.2.cmp(&q.2)));
    Ok(scan_records(cands.into_iter().map(|(n, d, v)| (n, d, v.to_vec())).collect()))
}

/// Records around `x` among all points of height ≤ `hmax`: the strip scan
/// on Gr(1,2), full enumeration otherwise.
pub fn records_up_to(desc: &VarietyDescriptor, x: &RealPoint, hmax: f64, cfg: &EnumConfig) -> Result<ApproxRecord> {
    if x.family != desc.family {
        return Err(Error::InvalidParameter("center belongs to another variety".into()));
    }
    if desc.pic_rank != 1 {
        return Err(Error::UnsupportedFamily(format!("{desc}: records need a single height")));
    }
    if desc.family == (Family::Grassmannian { l: 1, d: 2 }) {
        return line_records(x, hmax);
    }
    let set = enumerate_points(desc, &[hmax], cfg)?;
    best_approx_records(x, &set.points)
}

/// Exponent estimates from the records with `H ≥ h_min`.
pub fn estimate_beta(rec: &ApproxRecord, h_min: f64) -> Result<BetaEstimate> {
    let used: Vec<&RecordEntry> = rec.entries.iter().filter(|e| e.h >= h_min && e.h > 1.0).collect();
    if used.len() < 3 {
        return Err(Error::InsufficientData(format!("{} records with H >= {h_min}; need 3", used.len())));
    }
    if used.iter().any(|e| !(e.d > 0.0)) {
        return Err(Error::InvalidParameter("record at distance zero".into()));
    }
    let x: Vec<f64> = used.iter().map(|e| e.h.ln()).collect();
    let y: Vec<f64> = used.iter().map(|e| e.d.recip()).collect();
    let slope = log_linear_fit(&x, &y)?.a;
    let max_ratio = used.iter().map(|e| -e.d.ln() / e.h.ln()).fold(f64::NEG_INFINITY, f64::max);
    Ok(BetaEstimate { slope, max_ratio, used: used.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::centers::parse_center;
    use proptest::prelude::*;

    fn gr12() -> VarietyDescriptor {
        VarietyDescriptor::grassmannian(1, 2).unwrap()
    }

    fn all_lines(x: &RealPoint, hmax: f64) -> ApproxRecord {
        let set = enumerate_points(&gr12(), &[hmax], &EnumConfig::default()).unwrap();
        best_approx_records(x, &set.points).unwrap()
    }

    /// Convergents (q, p) of p/q → φ, starting from 1/0.
    fn golden_convergents(nmax: i128) -> Vec<[i64; 2]> {
        let (mut q, mut p) = (0i64, 1i64);
        let mut out = Vec::new();
        while (q as i128).pow(2) + (p as i128).pow(2) <= nmax {
            out.push([q, p]);
            (q, p) = (p, p + q);
        }
        out
    }

    #[test]
    fn golden_records_are_convergents() {
        let x = parse_center(&gr12(), "golden").unwrap();
        let rec = line_records(&x, 1e6).unwrap();
        let got: Vec<Vec<i64>> = rec.entries.iter().map(|e| e.point.clone()).collect();
        let want: Vec<Vec<i64>> = golden_convergents(norm_bound(1e6)).into_iter().map(|v| v.to_vec()).collect();
        assert_eq!(got, want);
        let beta = estimate_beta(&rec, 100.0).unwrap();
        assert!((beta.slope - 2.0).abs() < 0.05, "{beta:?}");
        // −log d = 2 log H + log(√5·(1+φ²)/… ) stays below 2 plus a small excess
        assert!(beta.max_ratio > 1.9 && beta.max_ratio < 2.3, "{beta:?}");
    }

    #[test]
    fn strip_matches_full_scan() {
        let desc = gr12();
        for name in ["golden", "sqrt2", "random:3", "random:11", "rational:3,5", "rational:1,0", "rational:7,-2"] {
            let x = parse_center(&desc, name).unwrap();
            assert_eq!(line_records(&x, 600.0).unwrap(), all_lines(&x, 600.0), "{name}");
        }
    }

    #[test]
    fn rational_center_has_exponent_one() {
        let x = parse_center(&gr12(), "rational:3,5").unwrap();
        let rec = line_records(&x, 1e6).unwrap();
        let beta = estimate_beta(&rec, 100.0).unwrap();
        assert!((beta.slope - 1.0).abs() < 0.1, "{beta:?}");
        // Farey oracle: neighbours (q', p') with |5q' − 3p'| = 1 sit at
        // distance 1/(h₀·c₀), so H·d·h₀ → 1 along the records
        let h0 = 34f64.sqrt();
        for e in rec.entries.iter().filter(|e| e.h > 100.0) {
            let det = (5 * e.point[0] - 3 * e.point[1]).abs();
            assert_eq!(det, 1, "{e:?}");
            assert!((e.h * e.d * h0 - 1.0).abs() < 1e-3, "{e:?}");
        }
    }

    #[test]
    fn liouville_center_is_very_well_approximable() {
        let x = parse_center(&gr12(), "liouville").unwrap();
        // the q = 10⁶ approximant has height 1.006·10⁶
        let rec = line_records(&x, 1.1e6).unwrap();
        let beta = estimate_beta(&rec, 10.0).unwrap();
        assert!(beta.max_ratio >= 3.99, "{beta:?}");
        let last = rec.entries.last().unwrap();
        assert_eq!(last.point, vec![1_000_000, 110_001]);
    }

    #[test]
    fn empty_and_short_records() {
        let x = parse_center(&gr12(), "golden").unwrap();
        assert!(best_approx_records(&x, &[]).unwrap().entries.is_empty());
        assert!(line_records(&x, 0.5).unwrap().entries.is_empty());
        let rec = line_records(&x, 3.0).unwrap();
        assert!(matches!(estimate_beta(&rec, 1.0), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn planted_exponent_is_exact() {
        for beta0 in [1.0, 1.5, 2.0, 3.7] {
            let entries = (1..40)
                .map(|k| {
                    let h = 1.5f64.powi(k) + 1.0;
                    RecordEntry { h, d: h.powf(-beta0), point: vec![] }
                })
                .collect();
            let est = estimate_beta(&ApproxRecord { entries }, 2.0).unwrap();
            assert!((est.slope - beta0).abs() < 1e-10 && (est.max_ratio - beta0).abs() < 1e-10, "{est:?}");
        }
    }

    #[test]
    fn other_families_use_the_full_scan() {
        let desc = VarietyDescriptor::grassmannian(1, 3).unwrap();
        let x = RealPoint::random(&desc, 5).unwrap();
        let rec = records_up_to(&desc, &x, 60.0, &EnumConfig::default()).unwrap();
        assert!(rec.entries.len() >= 4);
        let flag = VarietyDescriptor::full_flag3();
        let y = RealPoint::random(&flag, 1).unwrap();
        assert!(matches!(records_up_to(&flag, &y, 5.0, &EnumConfig::default()), Err(Error::UnsupportedFamily(_))));
    }

    fn check_records(rec: &ApproxRecord) {
        for w in rec.entries.windows(2) {
            assert!(w[0].h < w[1].h && w[0].d > w[1].d);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn records_ignore_input_order(seed in 0u64..1000, rot in 0usize..500) {
            let desc = VarietyDescriptor::grassmannian(1, 3).unwrap();
            let x = RealPoint::random(&desc, seed).unwrap();
            let mut pts = enumerate_points(&desc, &[12.0], &EnumConfig::default()).unwrap().points;
            let a = best_approx_records(&x, &pts).unwrap();
            check_records(&a);
            pts.reverse();
            let k = rot % pts.len();
            pts.rotate_left(k);
            prop_assert_eq!(a, best_approx_records(&x, &pts).unwrap());
        }
    }
}
