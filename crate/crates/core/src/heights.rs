//! Multiheights, closed height windows and the ν-measure.

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::varieties::{RationalPoint, VarietyDescriptor};

/// `log` of the Euclidean norm of a primitive vector, from its squared norm.
/// Every height in the crate goes through this one function.
pub fn log_height(n2: i128) -> f64 {
    0.5 * (n2 as f64).ln()
}

/// Log-heights, one per height generator.
pub type Multiheight = SmallVec<[f64; 2]>;

pub fn multiheight(v: &RationalPoint) -> Multiheight {
    v.norms2().iter().map(|&n| log_height(n)).collect()
}

/// Slack for boundary ties: a few ulps of the bound. Distinct integer norms
/// below ~10^13 are further apart than this in log scale.
pub(crate) fn boundary_slack(bound: f64) -> f64 {
    4.0 * f64::EPSILON * bound.abs().max(1.0)
}

/// Closed `x ≤ bound` up to boundary slack.
#[inline]
pub fn le_bound(x: f64, bound: f64) -> bool {
    x <= bound + boundary_slack(bound)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WindowSpec {
    /// `0 ≤ log H ≤ t` for a single generator.
    Cap { t: f64 },
    /// `D_t = D₀ + t·u` with `D₀ = [d0_lo, d0_hi]`.
    MovingBox { d0_lo: Vec<f64>, d0_hi: Vec<f64>, u: Vec<f64>, t: f64 },
}

impl WindowSpec {
    pub fn dim(&self) -> usize {
        match self {
            WindowSpec::Cap { .. } => 1,
            WindowSpec::MovingBox { d0_lo, .. } => d0_lo.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            WindowSpec::Cap { t } if t.is_finite() => Ok(()),
            WindowSpec::Cap { .. } => Err(Error::InvalidParameter("window time must be finite".into())),
            WindowSpec::MovingBox { d0_lo, d0_hi, u, t } => {
                if d0_hi.len() != d0_lo.len() || u.len() != d0_lo.len() {
                    return Err(Error::DimensionMismatch { expected: d0_lo.len(), got: d0_hi.len().max(u.len()) });
                }
                if !t.is_finite() || d0_lo.iter().chain(d0_hi).chain(u).any(|x| !x.is_finite()) {
                    return Err(Error::InvalidParameter("window data must be finite".into()));
                }
                if d0_lo.iter().zip(d0_hi).any(|(a, b)| a > b) {
                    return Err(Error::InvalidParameter("box needs d0_lo <= d0_hi".into()));
                }
                if u.iter().any(|&x| x <= 0.0) {
                    return Err(Error::InvalidParameter("direction u must be strictly positive".into()));
                }
                Ok(())
            }
        }
    }

    /// The same window shape at another time.
    pub fn at(&self, t: f64) -> WindowSpec {
        match self {
            WindowSpec::Cap { .. } => WindowSpec::Cap { t },
            WindowSpec::MovingBox { d0_lo, d0_hi, u, .. } => {
                WindowSpec::MovingBox { d0_lo: d0_lo.clone(), d0_hi: d0_hi.clone(), u: u.clone(), t }
            }
        }
    }

    /// Lower and upper corners.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            WindowSpec::Cap { t } => (vec![0.0], vec![*t]),
            WindowSpec::MovingBox { d0_lo, d0_hi, u, t } => (
                d0_lo.iter().zip(u).map(|(a, b)| a + t * b).collect(),
                d0_hi.iter().zip(u).map(|(a, b)| a + t * b).collect(),
            ),
        }
    }
}

pub fn in_window(h: &[f64], w: &WindowSpec) -> Result<bool> {
    if h.len() != w.dim() {
        return Err(Error::DimensionMismatch { expected: w.dim(), got: h.len() });
    }
    let (lo, hi) = w.bounds();
    Ok(h.iter().zip(lo.iter().zip(&hi)).all(|(&x, (&a, &b))| le_bound(a, x) && le_bound(x, b)))
}

/// `ν(D) = ∫_D exp(⟨c, y⟩) dy` with `c` the density exponents of the
/// descriptor. A cap is the box `[0, t]`.
pub fn nu_measure(desc: &VarietyDescriptor, w: &WindowSpec) -> Result<f64> {
    w.validate()?;
    let c = desc.rho_coords_f64();
    if w.dim() != c.len() {
        return Err(Error::DimensionMismatch { expected: c.len(), got: w.dim() });
    }
    let (lo, hi) = w.bounds();
    Ok(c.iter().zip(lo.iter().zip(&hi)).map(|(&ci, (&a, &b))| integral_exp(ci, a, b)).product())
}

/// `∫_a^b e^{cy} dy`, zero for empty intervals.
fn integral_exp(c: f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    if c == 0.0 {
        return b - a;
    }
    (c * a).exp() * (c * (b - a)).exp_m1() / c
}

/// Whether the window lies inside the region `log H_i ≤ ln(hmax_i)`.
pub fn window_covered(w: &WindowSpec, hmax: &[f64]) -> bool {
    let (_, hi) = w.bounds();
    hi.len() == hmax.len() && hi.iter().zip(hmax).all(|(&b, &h)| h >= 1.0 && b <= h.ln() + boundary_slack(h.ln()))
}
