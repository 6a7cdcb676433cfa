//! Zooming measures: rescaled chart clouds of rational points near a
//! center, box masses, mass growth slopes and uniformity statistics.

pub mod sector;
mod stats;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::counting::{covering_hmax, log_linear_fit, FitResult};
use crate::error::{Error, Result};
use crate::heights::{in_window, multiheight, window_covered, WindowSpec};
use crate::varieties::enumerate::{canonical_cmp, norm_bound};
use crate::varieties::{
    chart, enumerate_points, rescale, rescale_factor, Coverage, EnumConfig, Family, PointSet, RationalPoint, RealPoint,
    TangentVector, VarietyDescriptor,
};
use sector::{coprime_in_range, max_norm2_in_cap, Cone, Divisors};
pub use stats::{chi_square_uniform, ks_p_value, ks_uniform, ChiSquare};

/// Closed box in flattened chart coordinates (graded components in order).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZoomBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ZoomBox {
    pub fn cube(dim: usize, r: f64) -> Self {
        ZoomBox { lo: vec![-r; dim], hi: vec![r; dim] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    #[inline]
    pub fn contains(&self, z: &[f64]) -> bool {
        z.iter().zip(self.lo.iter().zip(&self.hi)).all(|(&x, (&a, &b))| a <= x && x <= b)
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if self.lo.len() != dim || self.hi.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: self.lo.len().max(self.hi.len()) });
        }
        if self.lo.iter().zip(&self.hi).any(|(a, b)| !(a <= b) || !a.is_finite() || !b.is_finite()) {
            return Err(Error::InvalidParameter("box needs finite lo <= hi".into()));
        }
        Ok(())
    }

    /// Largest quasi-norm over the box.
    fn max_quasi_norm(&self, grading: &[usize]) -> f64 {
        let mut off = 0;
        let mut m = 0.0f64;
        for (k, &g) in grading.iter().enumerate() {
            let r2: f64 = (off..off + g).map(|i| self.lo[i].abs().max(self.hi[i].abs()).powi(2)).sum();
            m = m.max(r2.sqrt().powf(1.0 / (k + 1) as f64));
            off += g;
        }
        m
    }

    fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }
}

#[derive(Clone, Debug)]
pub struct ZoomCloud {
    pub center: RealPoint,
    pub tau: f64,
    pub t: f64,
    pub window: WindowSpec,
    pub grading: Vec<usize>,
    /// `rescale(chart(x, v), τt)` for the in-window points, in point order.
    pub points: Vec<TangentVector>,
    /// In-window points outside the chart domain.
    pub dropped: u64,
    /// Quasi-norm radius (rescaled) within which the cloud is complete.
    pub complete_radius: Option<f64>,
}

/// Builds `μ_{x,τ,t}` restricted to `window` from an enumerated point set.
pub fn build_zoom_cloud(
    desc: &VarietyDescriptor,
    x: &RealPoint,
    tau: f64,
    t: f64,
    window: &WindowSpec,
    set: &PointSet,
) -> Result<ZoomCloud> {
    if !(tau >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter("need tau >= 0 and finite t".into()));
    }
    if x.family != desc.family || set.desc.family != desc.family {
        return Err(Error::InvalidParameter("center, points and descriptor disagree on the family".into()));
    }
    window.validate()?;
    if !window_covered(window, &set.hmax) {
        let (_, hi) = window.bounds();
        return Err(Error::IncompleteEnumeration {
            needed: hi.iter().copied().fold(f64::MIN, f64::max),
            covered: set.hmax.iter().map(|h| h.ln()).fold(f64::MAX, f64::min),
        });
    }
    let s = tau * t;
    let complete_radius = match &set.coverage {
        Coverage::Full => None,
        Coverage::Chart { frame, radius } => {
            if frame.as_slice() != x.frame() {
                return Err(Error::InvalidParameter("local point set was built for another center".into()));
            }
            Some(radius * s.exp())
        }
    };
    let mapped: Vec<Option<Option<TangentVector>>> = set
        .points
        .par_iter()
        .map(|p| {
            let h = multiheight(p);
            match in_window(&h, window) {
                Ok(true) => Some(chart(x, p).ok().map(|z| rescale(&z, s))),
                _ => None,
            }
        })
        .collect();
    let mut points = Vec::new();
    let mut dropped = 0;
    for m in mapped.into_iter().flatten() {
        match m {
            Some(z) => points.push(z),
            None => dropped += 1,
        }
    }
    Ok(ZoomCloud {
        center: x.clone(),
        tau,
        t,
        window: window.clone(),
        grading: desc.grading_dims.clone(),
        points,
        dropped,
        complete_radius,
    })
}

fn check_box_complete(cloud: &ZoomCloud, bx: &ZoomBox) -> Result<()> {
    bx.validate(cloud.grading.iter().sum())?;
    if let Some(r) = cloud.complete_radius {
        let need = bx.max_quasi_norm(&cloud.grading);
        if need > r {
            return Err(Error::IncompleteEnumeration { needed: need, covered: r });
        }
    }
    Ok(())
}

pub fn mass_in_box(cloud: &ZoomCloud, bx: &ZoomBox) -> Result<u64> {
    check_box_complete(cloud, bx)?;
    Ok(cloud.points.iter().filter(|z| bx.contains(&z.flat())).count() as u64)
}

fn is_projective_line(desc: &VarietyDescriptor) -> bool {
    desc.family == Family::Grassmannian { l: 1, d: 2 }
}

/// Rational points of P¹ with height ≤ `hmax` whose chart at `x` has
/// `|z| ≤ radius` (radius at most 1/2), in canonical order.
pub fn local_line_points(x: &RealPoint, hmax: f64, radius: f64) -> Result<PointSet> {
    let desc = VarietyDescriptor::grassmannian(1, 2)?;
    if x.family != desc.family {
        return Err(Error::UnsupportedFamily(format!("{:?}", x.family)));
    }
    let cone = Cone::new(x.frame(), -radius, radius)
        .ok_or_else(|| Error::InvalidParameter(format!("local radius {radius} must lie in [0, 1/2]")))?;
    let n2 = norm_bound(hmax).max(if hmax >= 1.0 { max_norm2_in_cap(hmax.ln()) } else { 0 });
    let mut pts = Vec::new();
    cone.scan(n2, &|z| z.abs() <= radius, &mut |a, b1, b2| {
        for b in b1..=b2 {
            if crate::exactlat::small::gcd(a, b) == 1 {
                let v = cone.point(a, b);
                pts.push(RationalPoint::Grassmannian { plucker: v.clone(), basis: vec![v] });
            }
        }
    });
    pts.sort_unstable_by(canonical_cmp);
    Ok(PointSet {
        desc,
        hmax: vec![hmax],
        coverage: Coverage::Chart { frame: x.frame().to_vec(), radius },
        points: pts,
    })
}

/// Box mass of the P¹ zoom cloud at `(τ, t)` with a height cap at `t`,
/// counted without listing points. Agrees exactly with
/// [`mass_in_box`] on the cloud built from the same center.
pub fn line_sector_mass(x: &RealPoint, tau: f64, t: f64, bx: &ZoomBox) -> Result<u64> {
    bx.validate(1)?;
    let s = tau * t;
    let f = rescale_factor(1, s);
    let (lo, hi) = (bx.lo[0], bx.hi[0]);
    let cone = Cone::new(x.frame(), lo / f * (1.0 + 1e-9), hi / f * (1.0 + 1e-9))
        .ok_or_else(|| Error::InvalidParameter("box too wide for the sector counter".into()))?;
    let n2 = max_norm2_in_cap(t);
    let divs = Divisors::new(crate::varieties::enumerate::isqrt(n2) as usize + 1);
    let mut buf = Vec::new();
    let mut total = 0i64;
    cone.scan(
        n2,
        &|z| {
            let w = z * f;
            lo <= w && w <= hi
        },
        &mut |a, b1, b2| {
            if a == 0 {
                total += 1;
            } else {
                divs.squarefree(a as usize, &mut buf);
                total += coprime_in_range(&buf, b1, b2);
            }
        },
    );
    Ok(total as u64)
}

/// Growth exponent of the window family minus the zoom contraction.
pub fn predicted_slope(desc: &VarietyDescriptor, tau: f64, template: &WindowSpec) -> Result<f64> {
    let growth = match template {
        WindowSpec::Cap { .. } => desc
            .count_exponent()
            .ok_or(Error::DimensionMismatch { expected: desc.pic_rank, got: 1 })?,
        WindowSpec::MovingBox { u, .. } => {
            let c = desc.rho_coords_f64();
            if u.len() != c.len() {
                return Err(Error::DimensionMismatch { expected: c.len(), got: u.len() });
            }
            c.iter().zip(u).map(|(a, b)| a * b).sum()
        }
    };
    Ok(growth - tau * desc.rho_y as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeResult {
    pub t: Vec<f64>,
    pub mass: Vec<u64>,
    pub fit: FitResult,
    pub predicted: f64,
}

/// Slope of `log mass(box)` against `t` for the clouds `μ_{x,τ,t}`.
/// `template` gives the window shape (a cap uses `0 ≤ log H ≤ t`).
pub fn mass_slope(
    desc: &VarietyDescriptor,
    x: &RealPoint,
    tau: f64,
    t_grid: &[f64],
    template: &WindowSpec,
    bx: &ZoomBox,
    cfg: &EnumConfig,
) -> Result<SlopeResult> {
    if t_grid.len() < 4 || t_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter("need at least 4 strictly increasing times".into()));
    }
    bx.validate(desc.dim())?;
    let predicted = predicted_slope(desc, tau, template)?;
    if matches!(template, WindowSpec::Cap { .. }) && tau >= desc.beta(0) {
        return Err(Error::InvalidParameter(format!("tau {tau} must be below beta {}", desc.beta(0))));
    }
    let fast = is_projective_line(desc)
        && matches!(template, WindowSpec::Cap { .. })
        && t_grid.iter().all(|&t| {
            let f = rescale_factor(1, tau * t);
            bx.lo[0].abs().max(bx.hi[0].abs()) / f <= 0.25
        });
    let mass: Vec<u64> = if fast {
        t_grid.par_iter().map(|&t| line_sector_mass(x, tau, t, bx)).collect::<Result<_>>()?
    } else {
        let hmax = covering_hmax(template, t_grid);
        let set = enumerate_points(desc, &hmax, cfg)?;
        t_grid
            .iter()
            .map(|&t| mass_in_box(&build_zoom_cloud(desc, x, tau, t, &template.at(t), &set)?, bx))
            .collect::<Result<_>>()?
    };
    let n = t_grid.len();
    if let Some(&m) = mass[n / 2..].iter().find(|&&m| m < 10) {
        return Err(Error::InsufficientMass { mass: m, required: 10 });
    }
    let y: Vec<f64> = mass.iter().map(|&m| m as f64).collect();
    let fit = log_linear_fit(t_grid, &y)?;
    Ok(SlopeResult { t: t_grid.to_vec(), mass, fit, predicted })
}

/// The cloud at time `t` for the window `template.at(t)`, complete on `bx`.
/// Caps on Gr(1,2) only scan the cone the box pulls back to.
pub fn zoom_cloud_for_box(
    desc: &VarietyDescriptor,
    x: &RealPoint,
    tau: f64,
    t: f64,
    template: &WindowSpec,
    bx: &ZoomBox,
    cfg: &EnumConfig,
) -> Result<ZoomCloud> {
    bx.validate(desc.dim())?;
    let window = template.at(t);
    let reach = bx.lo.iter().chain(&bx.hi).fold(0.0f64, |m, v| m.max(v.abs()));
    let radius = reach / rescale_factor(1, tau * t) * 1.001;
    let set = if is_projective_line(desc) && matches!(template, WindowSpec::Cap { .. }) && radius <= 0.5 {
        local_line_points(x, t.exp(), radius)?
    } else {
        enumerate_points(desc, &covering_hmax(template, &[t]), cfg)?
    };
    build_zoom_cloud(desc, x, tau, t, &window, &set)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Uniformity {
    pub mass: u64,
    pub ks: Option<f64>,
    pub ks_p_value: Option<f64>,
    pub chi_square: Option<ChiSquare>,
    /// Counts over the equal-volume grid (4 cells per axis).
    pub counts: Vec<u64>,
}

pub const MIN_UNIFORMITY_MASS: u64 = 50;

pub fn uniformity_stats(cloud: &ZoomCloud, bx: &ZoomBox) -> Result<Uniformity> {
    check_box_complete(cloud, bx)?;
    let inside: Vec<Vec<f64>> = cloud.points.iter().map(|z| z.flat()).filter(|z| bx.contains(z)).collect();
    let mass = inside.len() as u64;
    if mass < MIN_UNIFORMITY_MASS {
        return Err(Error::InsufficientMass { mass, required: MIN_UNIFORMITY_MASS });
    }
    let chi = chi_square_uniform(&inside, &bx.lo, &bx.hi, 4);
    if bx.dim() == 1 {
        let xs: Vec<f64> = inside.iter().map(|z| z[0]).collect();
        let d = ks_uniform(&xs, bx.lo[0], bx.hi[0]);
        Ok(Uniformity { mass, ks: Some(d), ks_p_value: Some(ks_p_value(d, xs.len())), counts: chi.counts, chi_square: None })
    } else {
        Ok(Uniformity { mass, ks: None, ks_p_value: None, counts: chi.counts.clone(), chi_square: Some(chi) })
    }
}

/// Expected mass under the Lebesgue limit is proportional to the volume;
/// exposed for reports.
pub fn box_volume(bx: &ZoomBox) -> f64 {
    bx.volume()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::dd;

    fn sqrt2_line() -> RealPoint {
        RealPoint::subspace(&[vec![dd(1.0), dd(2.0).sqrt()]]).unwrap()
    }

    fn gr12() -> VarietyDescriptor {
        VarietyDescriptor::grassmannian(1, 2).unwrap()
    }

    #[test]
    fn sqrt2_mass_matches_filtered_scan() {
        // points p/q with H ≤ 10^4 and |chart| ≤ 10^-4: scan q, p near q√2
        let x = sqrt2_line();
        let t = 1e4f64.ln();
        let mut oracle = 0u64;
        let frame = x.frame();
        let (s0, s1) = (&frame[0], &frame[1]);
        for a in 1i64..=10_000 {
            let c = (a as f64 * 2f64.sqrt()).round() as i64;
            for b in c - 20..=c + 20 {
                if crate::exactlat::small::gcd(a, b) != 1 || (a * a + b * b) as f64 > 1e8 {
                    continue;
                }
                let (c0, c1) = (s0[0] * a as f64 + s0[1] * b as f64, s1[0] * a as f64 + s1[1] * b as f64);
                if (c1 / c0).abs() * 1e4 <= 1.0 - 1e-9 {
                    oracle += 1;
                }
            }
        }
        let bx = ZoomBox::cube(1, 1.0);
        let fast = line_sector_mass(&x, 1.0, t, &bx).unwrap();
        let set = local_line_points(&x, 1e4, 2e-4).unwrap();
        let cloud = build_zoom_cloud(&gr12(), &x, 1.0, t, &WindowSpec::Cap { t }, &set).unwrap();
        let slow = mass_in_box(&cloud, &bx).unwrap();
        assert_eq!(fast, slow);
        // oracle uses a strict inner margin, so it can only miss boundary points
        assert!(fast >= oracle && fast <= oracle + 2, "{fast} vs {oracle}");
        assert!(fast > 100);
    }

    #[test]
    fn sector_counts_agree_with_full_enumeration() {
        let desc = gr12();
        let set = enumerate_points(&desc, &[300.0], &EnumConfig::default()).unwrap();
        for seed in 0..6 {
            let x = RealPoint::random(&desc, seed).unwrap();
            for (tau, t) in [(0.5, 5.0), (1.0, 5.7), (0.0, 4.0), (1.5, 5.5)] {
                let bx = ZoomBox { lo: vec![-0.3], hi: vec![0.7] };
                let f = rescale_factor(1, tau * t);
                if 0.7 / f > 0.5 {
                    continue;
                }
                let cloud = build_zoom_cloud(&desc, &x, tau, t, &WindowSpec::Cap { t }, &set).unwrap();
                assert_eq!(line_sector_mass(&x, tau, t, &bx).unwrap(), mass_in_box(&cloud, &bx).unwrap());
                let local = local_line_points(&x, 300.0, 0.7 / f * 1.001).unwrap();
                let lc = build_zoom_cloud(&desc, &x, tau, t, &WindowSpec::Cap { t }, &local).unwrap();
                assert_eq!(mass_in_box(&lc, &bx).unwrap(), mass_in_box(&cloud, &bx).unwrap());
            }
        }
    }

    #[test]
    fn box_clouds_match_full_clouds() {
        let desc = gr12();
        let x = sqrt2_line();
        let bx = ZoomBox::cube(1, 1.0);
        let cap = WindowSpec::Cap { t: 0.0 };
        for (tau, t) in [(1.0, 6.0), (0.5, 7.0), (0.2, 5.0)] {
            let local = zoom_cloud_for_box(&desc, &x, tau, t, &cap, &bx, &EnumConfig::default()).unwrap();
            let set = enumerate_points(&desc, &[t.exp()], &EnumConfig::default()).unwrap();
            let full = build_zoom_cloud(&desc, &x, tau, t, &cap.at(t), &set).unwrap();
            assert_eq!(mass_in_box(&local, &bx).unwrap(), mass_in_box(&full, &bx).unwrap(), "{tau} {t}");
        }
    }

    #[test]
    fn cloud_examples() {
        let desc = gr12();
        let x = RealPoint::from_rational(&desc, &RationalPoint::line(&[3, 1]).unwrap()).unwrap();
        let t = 100f64.ln();
        let set = enumerate_points(&desc, &[100.0], &EnumConfig::default()).unwrap();
        let cloud = build_zoom_cloud(&desc, &x, 1.0, t, &WindowSpec::Cap { t }, &set).unwrap();
        assert!(cloud.points.iter().any(|z| z.components[0][0] == 0.0));
        // tau = 0: box mass over the whole chart image equals the in-chart window count
        let c0 = build_zoom_cloud(&desc, &x, 0.0, t, &WindowSpec::Cap { t }, &set).unwrap();
        let all = mass_in_box(&c0, &ZoomBox::cube(1, 1e300)).unwrap();
        assert_eq!(all + c0.dropped, set.points.len() as u64);
        assert_eq!(c0.dropped, 1);
        let small = mass_in_box(&c0, &ZoomBox::cube(1, 0.5)).unwrap();
        assert!(small <= mass_in_box(&c0, &ZoomBox::cube(1, 1.0)).unwrap());
        // rational center, tau past the exponent: only x itself near 0
        let far = build_zoom_cloud(&desc, &x, 3.0, t, &WindowSpec::Cap { t }, &set).unwrap();
        assert_eq!(mass_in_box(&far, &ZoomBox::cube(1, 1.0)).unwrap(), 1);
        let empty = ZoomCloud { points: vec![], ..cloud.clone() };
        assert_eq!(mass_in_box(&empty, &ZoomBox::cube(1, 1.0)).unwrap(), 0);
        assert!(matches!(mass_in_box(&cloud, &ZoomBox::cube(2, 1.0)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn rescaling_commutes_with_building() {
        let desc = VarietyDescriptor::full_flag3();
        let x = RealPoint::random(&desc, 5).unwrap();
        let w = WindowSpec::MovingBox { d0_lo: vec![0.0, 0.0], d0_hi: vec![1.0, 1.0], u: vec![1.0, 1.0], t: 1.0 };
        let set = enumerate_points(&desc, &covering_hmax(&w, &[1.0]), &EnumConfig::default()).unwrap();
        let a = build_zoom_cloud(&desc, &x, 0.2, 1.0, &w, &set).unwrap();
        let b = build_zoom_cloud(&desc, &x, 0.5, 1.0, &w, &set).unwrap();
        for (p, q) in a.points.iter().zip(&b.points) {
            let r = rescale(p, 0.3);
            for (u, v) in r.flat().iter().zip(q.flat()) {
                assert!((u - v).abs() <= 1e-12 * v.abs().max(1.0));
            }
        }
    }

    #[test]
    fn incomplete_inputs_are_rejected() {
        let desc = gr12();
        let x = sqrt2_line();
        let set = enumerate_points(&desc, &[50.0], &EnumConfig::default()).unwrap();
        assert!(matches!(
            build_zoom_cloud(&desc, &x, 1.0, 5.0, &WindowSpec::Cap { t: 5.0 }, &set),
            Err(Error::IncompleteEnumeration { .. })
        ));
        let local = local_line_points(&x, 1e3, 1e-2).unwrap();
        let t = 1e3f64.ln();
        let cloud = build_zoom_cloud(&desc, &x, 0.0, t, &WindowSpec::Cap { t }, &local).unwrap();
        assert!(matches!(mass_in_box(&cloud, &ZoomBox::cube(1, 0.1)), Err(Error::IncompleteEnumeration { .. })));
        assert!(mass_in_box(&cloud, &ZoomBox::cube(1, 0.01)).is_ok());
    }

    #[test]
    fn quadric_slope_small_scale() {
        let desc = VarietyDescriptor::split_quadric(4).unwrap();
        let x = RealPoint::random(&desc, 1).unwrap();
        let r = mass_slope(&desc, &x, 0.5, &[3.0, 3.5, 4.0, 4.5, 5.0], &WindowSpec::Cap { t: 0.0 }, &ZoomBox::cube(2, 1.0), &EnumConfig::default())
            .unwrap();
        assert_eq!(r.predicted, 1.0);
        assert!((r.fit.a - 1.0).abs() < 0.3, "{r:?}");
    }

    #[test]
    fn uniformity_thresholds() {
        let desc = gr12();
        let x = sqrt2_line();
        let t: f64 = 6.0;
        let set = local_line_points(&x, t.exp() * (1.0 + 1e-12), 0.01).unwrap();
        let cloud = build_zoom_cloud(&desc, &x, 1.0, t, &WindowSpec::Cap { t }, &set).unwrap();
        assert!(matches!(uniformity_stats(&cloud, &ZoomBox::cube(1, 0.01)), Err(Error::InsufficientMass { .. })));
        let u = uniformity_stats(&cloud, &ZoomBox::cube(1, 1.0)).unwrap();
        assert_eq!(u.counts.iter().sum::<u64>(), u.mass);
        assert!(u.ks.unwrap() < 0.2, "{u:?}");
    }
}
