//! The diagonal flow `a_t = e^{−tY}` on the lattice `a_t·s_x⁻¹·Z^d` and its
//! escape diagnostics through the first minimum `λ₁`.

use num_bigint::BigInt;
use num_traits::FromPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::counting::log_linear_fit;
use crate::error::{Error, Result};
use crate::exactlat::{shortest_vectors, IntBasis, IntVec};
use crate::numeric::{dd, ddi, DD};
use crate::varieties::{Family, RealPoint, VarietyDescriptor};

/// Largest flow time kept within double-double accuracy.
pub const T_CAP: f64 = 25.0;
/// Binary digits of the integer lattice handed to the reduction.
const SCALE_BITS: i32 = 96;
/// Tail slopes of `−log λ₁` at least this large count as linear decay.
const LINEAR_SLOPE: f64 = 0.1;
/// `λ₁` staying above `e^{−3}` counts as bounded below.
const BOUNDED_DEPTH: f64 = 3.0;

/// Diagonal of `e^{−tY}`.
fn flow_diag(family: Family, t: f64) -> Result<Vec<f64>> {
    match family {
        Family::Grassmannian { l, d } => {
            let (lf, df) = (l as f64, d as f64);
            Ok((0..d).map(|i| if i < l { (-t * (df - lf) / df).exp() } else { (t * lf / df).exp() }).collect())
        }
        Family::FullFlag3 => Ok(vec![(-t).exp(), 1.0, t.exp()]),
        Family::SplitQuadric { n } => Err(Error::UnsupportedFamily(format!("flow on quadric:{n}"))),
    }
}

/// `e^{−tY}` as a dense matrix in the frame coordinates.
pub fn flow_matrix(desc: &VarietyDescriptor, t: f64) -> Result<Vec<Vec<f64>>> {
    let diag = flow_diag(desc.family, t)?;
    let n = diag.len();
    Ok((0..n).map(|i| (0..n).map(|j| if i == j { diag[i] } else { 0.0 }).collect()).collect())
}

/// Hermite's constant `γ_d` for `d ≤ 4`.
pub fn hermite_constant(d: usize) -> Option<f64> {
    match d {
        1 => Some(1.0),
        2 => Some(2.0 / 3f64.sqrt()),
        3 => Some(2f64.cbrt()),
        4 => Some(2f64.sqrt()),
        _ => None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Verdict {
    BoundedBelow { min_lambda1: f64 },
    SublinearDecay { final_rate: f64 },
    LinearDecay { slope: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscapeTrace {
    pub t: Vec<f64>,
    pub lambda1: Vec<f64>,
    /// `−log λ₁ / t`, zero at `t = 0`.
    pub rate: Vec<f64>,
    pub verdict: Verdict,
}

impl EscapeTrace {
    /// Minkowski's bound `λ₁² ≤ γ_d` for unimodular lattices, at every `t`.
    pub fn minkowski_holds(&self, d: usize) -> bool {
        let g = hermite_constant(d).unwrap_or(f64::INFINITY);
        self.lambda1.iter().all(|&l| l > 0.0 && l * l <= g * (1.0 + 1e-12))
    }
}

fn dd_to_big(x: DD) -> BigInt {
    let hi = x.hi().round();
    let lo = (x - dd(hi)).hi().round();
    BigInt::from_f64(hi).expect("finite") + BigInt::from_f64(lo).expect("finite")
}

/// `λ₁(a_t·s_x⁻¹·Z^d)`. The lattice is rounded to `2^{-96}` for the
/// reduction; the minimum is then re-evaluated on the returned integer
/// coefficient vectors in double-double.
pub fn first_minimum(x: &RealPoint, t: f64) -> Result<f64> {
    if !(0.0..=T_CAP).contains(&t) {
        return Err(Error::PrecisionLoss { t, cap: T_CAP });
    }
    let diag = flow_diag(x.family, t)?;
    let s = x.frame_dd();
    let d = s.len();
    // row i: a_t·Sᵀ·e_i, whose j-th entry is e^{..}_j·S[j][i]
    let rows: Vec<Vec<DD>> = (0..d).map(|i| (0..d).map(|j| s[j][i] * diag[j]).collect()).collect();
    let scale = 2f64.powi(SCALE_BITS / 2);
    let ints: Vec<IntVec> =
        rows.iter().map(|r| IntVec(r.iter().map(|&v| dd_to_big(v * scale * scale)).collect())).collect();
    let short = shortest_vectors(&IntBasis::new(ints)?, 1e-6)?;
    let eval = |coeffs: &IntVec| -> f64 {
        let c: Vec<DD> = coeffs.0.iter().map(|b| ddi(b.try_into().unwrap_or(i64::MAX))).collect();
        (0..d)
            .map(|j| {
                let v = (0..d).fold(dd(0.0), |acc, i| acc + c[i] * rows[i][j]);
                v * v
            })
            .fold(dd(0.0), |a, b| a + b)
            .sqrt()
            .hi()
    };
    short
        .iter()
        .map(|sv| eval(&sv.coeffs))
        .min_by(f64::total_cmp)
        .ok_or_else(|| Error::InsufficientData("no short vector".into()))
}

/// `λ₁` along `t_grid` (increasing, starting at 0) with a decay verdict.
pub fn escape_trace(x: &RealPoint, t_grid: &[f64]) -> Result<EscapeTrace> {
    if t_grid.is_empty() || t_grid[0] != 0.0 || t_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter("time grid must increase from 0".into()));
    }
    if let Some(&t) = t_grid.iter().find(|&&t| t > T_CAP) {
        return Err(Error::PrecisionLoss { t, cap: T_CAP });
    }
    let lambda1 = t_grid.par_iter().map(|&t| first_minimum(x, t)).collect::<Result<Vec<f64>>>()?;
    let rate: Vec<f64> = t_grid.iter().zip(&lambda1).map(|(&t, &l)| if t > 0.0 { -l.ln() / t } else { 0.0 }).collect();
    let verdict = classify(t_grid, &lambda1);
    Ok(EscapeTrace { t: t_grid.to_vec(), lambda1, rate, verdict })
}

fn classify(t: &[f64], lambda1: &[f64]) -> Verdict {
    let tmax = *t.last().expect("nonempty");
    let tail: Vec<usize> = (0..t.len()).filter(|&i| t[i] >= tmax / 2.0).collect();
    let slope = if tail.len() >= 2 {
        let x: Vec<f64> = tail.iter().map(|&i| t[i]).collect();
        let y: Vec<f64> = tail.iter().map(|&i| lambda1[i].recip()).collect();
        log_linear_fit(&x, &y).map(|f| f.a).unwrap_or(0.0)
    } else {
        0.0
    };
    let min = lambda1.iter().copied().fold(f64::INFINITY, f64::min);
    if slope >= LINEAR_SLOPE {
        Verdict::LinearDecay { slope }
    } else if -min.ln() <= BOUNDED_DEPTH {
        Verdict::BoundedBelow { min_lambda1: min }
    } else {
        let last = lambda1.len() - 1;
        Verdict::SublinearDecay { final_rate: if tmax > 0.0 { -lambda1[last].ln() / tmax } else { 0.0 } }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::centers::parse_center;
    use crate::diophantine::line_records;
    use crate::numeric::det_f64;
    use crate::varieties::{chart_rep, rescale, PointRep};

    fn grid(tmax: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|i| tmax * i as f64 / n as f64).collect()
    }

    #[test]
    fn flow_is_unimodular() {
        for v in ["gr:1:2", "gr:1:3", "gr:2:4", "gr:3:4", "flag3"] {
            let desc: VarietyDescriptor = v.parse().unwrap();
            for t in [0.0, 0.3, 5.0, 25.0] {
                let m = flow_matrix(&desc, t).unwrap();
                assert!((det_f64(&m) - 1.0).abs() < 1e-12, "{v} {t}");
                if t == 0.0 {
                    assert!(m.iter().enumerate().all(|(i, r)| r.iter().enumerate().all(|(j, &x)| x == (i == j) as u8 as f64)));
                }
            }
        }
        let m = flow_matrix(&"gr:1:2".parse().unwrap(), 2.0).unwrap();
        assert!((m[0][0] - (-1f64).exp()).abs() < 1e-15 && (m[1][1] - 1f64.exp()).abs() < 1e-15);
        assert!(matches!(flow_matrix(&"quadric:4".parse().unwrap(), 1.0), Err(Error::UnsupportedFamily(_))));
    }

    #[test]
    fn flow_dilates_charts() {
        // at the base point the flow multiplies chart coordinates by e^t
        for v in ["gr:1:2", "gr:1:3", "gr:2:4"] {
            let desc: VarietyDescriptor = v.parse().unwrap();
            let Family::Grassmannian { l, d } = desc.family else { unreachable!() };
            let base: Vec<Vec<i64>> = (0..l).map(|i| (0..d).map(|j| (i == j) as i64).collect()).collect();
            let x = RealPoint::from_rational(&desc, &crate::varieties::RationalPoint::subspace(&base).unwrap()).unwrap();
            let rows: Vec<Vec<f64>> =
                (0..l).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.01 * (1 + i + 2 * j) as f64 }).collect()).collect();
            let z = chart_rep(&x, &PointRep::Subspace(rows.clone())).unwrap();
            let t = 0.7;
            let diag = flow_diag(desc.family, t).unwrap();
            let moved: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().zip(&diag).map(|(a, b)| a * b).collect()).collect();
            let zt = chart_rep(&x, &PointRep::Subspace(moved)).unwrap();
            for (a, b) in zt.flat().iter().zip(rescale(&z, t).flat()) {
                assert!((a - b).abs() < 1e-13 * b.abs().max(1.0), "{v}");
            }
        }
    }

    #[test]
    fn rational_center_decays_linearly() {
        let desc: VarietyDescriptor = "gr:1:2".parse().unwrap();
        let x = parse_center(&desc, "rational:1,0").unwrap();
        let tr = escape_trace(&x, &grid(20.0, 20)).unwrap();
        for (t, l) in tr.t.iter().zip(&tr.lambda1) {
            assert!((l - (-t / 2.0).exp()).abs() < 1e-12 * l);
        }
        let Verdict::LinearDecay { slope } = tr.verdict else { panic!("{:?}", tr.verdict) };
        assert!((slope - 0.5).abs() < 0.025);
        assert!(tr.minkowski_holds(2));
        let y = parse_center(&desc, "rational:3,5").unwrap();
        let Verdict::LinearDecay { slope } = escape_trace(&y, &grid(20.0, 20)).unwrap().verdict else { panic!() };
        assert!((slope - 0.5).abs() < 0.025);
    }

    #[test]
    fn golden_orbit_is_bounded() {
        let desc: VarietyDescriptor = "gr:1:2".parse().unwrap();
        let x = parse_center(&desc, "golden").unwrap();
        let tr = escape_trace(&x, &grid(20.0, 40)).unwrap();
        assert!(tr.lambda1.iter().all(|&l| l >= 0.2), "{:?}", tr.lambda1);
        assert!(matches!(tr.verdict, Verdict::BoundedBelow { .. }));
        assert!(tr.minkowski_holds(2));
        // badly approximable: H²·d stays bounded below along the records
        let rec = line_records(&x, 1e5).unwrap();
        assert!(rec.entries.iter().skip(1).all(|e| e.h * e.h * e.d > 0.3));
    }

    #[test]
    fn random_centers_have_zero_rate() {
        for v in ["gr:1:2", "gr:1:3", "gr:2:4", "flag3"] {
            let desc: VarietyDescriptor = v.parse().unwrap();
            for seed in 0..3 {
                let x = RealPoint::random(&desc, seed).unwrap();
                let tr = escape_trace(&x, &grid(20.0, 10)).unwrap();
                assert!(*tr.rate.last().unwrap() < 0.1, "{v} {seed}: {:?}", tr.rate);
                assert!(tr.minkowski_holds(desc.ambient()));
                assert!((tr.lambda1[0] - 1.0).abs() < 1e-12, "{v}: λ₁(0) = {}", tr.lambda1[0]);
            }
        }
    }

    #[test]
    fn time_limits() {
        let desc: VarietyDescriptor = "gr:1:2".parse().unwrap();
        let x = parse_center(&desc, "golden").unwrap();
        assert!(matches!(escape_trace(&x, &[0.0, 26.0]), Err(Error::PrecisionLoss { .. })));
        assert!(matches!(escape_trace(&x, &[1.0, 2.0]), Err(Error::InvalidParameter(_))));
        let q = RealPoint::random(&"quadric:4".parse().unwrap(), 0).unwrap();
        assert!(matches!(escape_trace(&q, &[0.0]), Err(Error::UnsupportedFamily(_))));
    }
}
