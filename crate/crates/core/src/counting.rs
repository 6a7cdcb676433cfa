//! Height-counting series, power-log fits and moving-window counts.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heights::{in_window, le_bound, multiheight, nu_measure, window_covered, Multiheight, WindowSpec};
use crate::varieties::{fold_points, EnumConfig, VarietyDescriptor};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountSeries {
    pub grid: Vec<f64>,
    pub counts: Vec<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// RMS residual of the fit in log scale.
    pub residual: f64,
}

/// Nested windows indexed by a grid.
#[derive(Clone, Debug, PartialEq)]
pub enum WindowFamily {
    /// Grid entries are heights `H`; window `0 ≤ log H(v) ≤ log H`.
    HeightCaps,
    /// Grid entries are times `t`; the template is re-timed per entry.
    Moving(WindowSpec),
}

impl WindowFamily {
    pub fn window(&self, g: f64) -> WindowSpec {
        match self {
            WindowFamily::HeightCaps => WindowSpec::Cap { t: g.ln() },
            WindowFamily::Moving(w) => w.at(g),
        }
    }
}

/// Multiheights of every point with heights ≤ `hmax`, in canonical point
/// order.
pub fn collect_multiheights(desc: &VarietyDescriptor, hmax: &[f64], cfg: &EnumConfig) -> Result<Vec<Multiheight>> {
    fold_points(
        desc,
        hmax,
        cfg,
        Vec::new,
        |acc: &mut Vec<Multiheight>, p| acc.push(multiheight(&p)),
        |acc, mut other| acc.append(&mut other),
    )
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|g| !g.is_finite()) || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// Number of points in each window of the family; `hmax` is the bound the
/// heights were enumerated to.
pub fn count_series(heights: &[Multiheight], hmax: &[f64], grid: &[f64], family: &WindowFamily) -> Result<CountSeries> {
    check_grid(grid)?;
    let windows: Vec<WindowSpec> = grid.iter().map(|&g| family.window(g)).collect();
    for w in &windows {
        w.validate()?;
        if !window_covered(w, hmax) {
            let (_, hi) = w.bounds();
            return Err(Error::IncompleteEnumeration {
                needed: hi.iter().copied().fold(f64::MIN, f64::max),
                covered: hmax.iter().map(|h| h.ln()).fold(f64::MAX, f64::min),
            });
        }
    }
    let counts = match family {
        WindowFamily::HeightCaps => {
            if heights.iter().any(|h| h.len() != 1) {
                return Err(Error::DimensionMismatch { expected: 1, got: heights.first().map_or(0, |h| h.len()) });
            }
            let mut hs: Vec<f64> = heights.iter().map(|h| h[0]).collect();
            hs.sort_by(f64::total_cmp);
            windows
                .iter()
                .map(|w| {
                    let WindowSpec::Cap { t } = w else { unreachable!() };
                    hs.partition_point(|&h| le_bound(h, *t)) as u64
                })
                .collect()
        }
        WindowFamily::Moving(_) => {
            let mut counts = vec![0u64; windows.len()];
            for h in heights {
                for (c, w) in counts.iter_mut().zip(&windows) {
                    *c += in_window(h, w)? as u64;
                }
            }
            counts
        }
    };
    Ok(CountSeries { grid: grid.to_vec(), counts })
}

/// Least-squares fit of `log N = log c + a·log H + b·log log H` over the
/// tail half of the grid. With `b_fixed`, only `a` and `c` are fitted.
pub fn fit_power_log(series: &CountSeries, b_fixed: Option<i32>) -> Result<FitResult> {
    let n = series.grid.len();
    let tail: Vec<(f64, f64)> = (n / 2..n)
        .filter(|&i| series.counts[i] >= 10)
        .map(|i| (series.grid[i], series.counts[i] as f64))
        .collect();
    if tail.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "{} tail grid values with counts >= 10; need 5",
            tail.len()
        )));
    }
    if b_fixed.is_none() && tail.iter().any(|&(h, _)| h <= 1.0) {
        return Err(Error::InsufficientData("log log H needs H > 1".into()));
    }
    let cols = if b_fixed.is_some() { 2 } else { 3 };
    let bf = b_fixed.map_or(0.0, f64::from);
    let x = DMatrix::from_fn(tail.len(), cols, |r, c| match c {
        0 => 1.0,
        1 => tail[r].0.ln(),
        _ => tail[r].0.ln().ln(),
    });
    let y = DVector::from_fn(tail.len(), |r, _| {
        let (h, count) = tail[r];
        count.ln() - if b_fixed.is_some() && bf != 0.0 { bf * h.ln().ln() } else { 0.0 }
    });
    let coef = x.clone().svd(true, true).solve(&y, 1e-14).map_err(|e| Error::InsufficientData(e.into()))?;
    let res = &x * &coef - &y;
    let residual = (res.norm_squared() / tail.len() as f64).sqrt();
    Ok(FitResult { a: coef[1], b: if cols == 3 { coef[2] } else { bf }, c: coef[0].exp(), residual })
}

/// Slope and intercept of `log y` against `x` by least squares, over the
/// pairs with `y > 0`.
pub fn log_linear_fit(x: &[f64], y: &[f64]) -> Result<FitResult> {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).filter(|(_, &v)| v > 0.0).map(|(&a, &b)| (a, b.ln())).collect();
    if pts.len() < 2 {
        return Err(Error::InsufficientData("need two positive values for a slope".into()));
    }
    let m = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / m, pts.iter().map(|p| p.1).sum::<f64>() / m);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("abscissae coincide".into()));
    }
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx;
    let icpt = my - slope * mx;
    let residual = (pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum::<f64>() / m).sqrt();
    Ok(FitResult { a: slope, b: 0.0, c: icpt.exp(), residual })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub t: f64,
    pub count: u64,
    pub nu: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioSummary {
    pub rows: Vec<RatioRow>,
    /// Mean of the last three nonzero ratios.
    pub kappa_hat: Option<f64>,
    /// `(max − min)/mean` over the same ratios.
    pub spread: Option<f64>,
    /// Slope of `log count` against `t`.
    pub slope: Option<f64>,
}

fn ratio_rows(desc: &VarietyDescriptor, template: &WindowSpec, t_grid: &[f64], counts: &[u64]) -> Result<Vec<RatioRow>> {
    t_grid
        .iter()
        .zip(counts)
        .map(|(&t, &count)| {
            let nu = nu_measure(desc, &template.at(t))?;
            let ratio = if count == 0 || nu <= 0.0 { 0.0 } else { count as f64 / nu };
            Ok(RatioRow { t, count, nu, ratio })
        })
        .collect()
}

pub fn summarize(rows: Vec<RatioRow>) -> RatioSummary {
    let nz: Vec<f64> = rows.iter().filter(|r| r.ratio > 0.0).map(|r| r.ratio).collect();
    let (kappa_hat, spread) = if nz.len() >= 3 {
        let last = &nz[nz.len() - 3..];
        let mean = last.iter().sum::<f64>() / 3.0;
        let (lo, hi) = last.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
        (Some(mean), Some((hi - lo) / mean))
    } else {
        (None, None)
    };
    let t: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let c: Vec<f64> = rows.iter().map(|r| r.count as f64).collect();
    let slope = log_linear_fit(&t, &c).ok().map(|f| f.a);
    RatioSummary { rows, kappa_hat, spread, slope }
}

/// Count/ν ratios of a moving window family over an already enumerated
/// height sample.
pub fn window_ratio_series(
    desc: &VarietyDescriptor,
    heights: &[Multiheight],
    hmax: &[f64],
    template: &WindowSpec,
    t_grid: &[f64],
) -> Result<RatioSummary> {
    let series = count_series(heights, hmax, t_grid, &WindowFamily::Moving(template.clone()))?;
    Ok(summarize(ratio_rows(desc, template, t_grid, &series.counts)?))
}

/// Height bounds enclosing every window of the family up to the last grid
/// entry (padded so that boundary ties are enumerated).
pub fn covering_hmax(template: &WindowSpec, t_grid: &[f64]) -> Vec<f64> {
    let (_, hi) = template.at(*t_grid.last().unwrap_or(&0.0)).bounds();
    let hi0 = template.at(*t_grid.first().unwrap_or(&0.0)).bounds().1;
    hi.iter().zip(hi0).map(|(&a, b)| a.max(b).exp() * (1.0 + 1e-12)).collect()
}

/// Same as [`window_ratio_series`] but enumerates on the fly without
/// storing points.
pub fn window_ratio_streaming(
    desc: &VarietyDescriptor,
    template: &WindowSpec,
    t_grid: &[f64],
    cfg: &EnumConfig,
) -> Result<RatioSummary> {
    check_grid(t_grid)?;
    template.validate()?;
    if template.dim() != desc.pic_rank {
        return Err(Error::DimensionMismatch { expected: desc.pic_rank, got: template.dim() });
    }
    let windows: Vec<WindowSpec> = t_grid.iter().map(|&t| template.at(t)).collect();
    let hmax = covering_hmax(template, t_grid);
    let counts = fold_points(
        desc,
        &hmax,
        cfg,
        || vec![0u64; windows.len()],
        |acc, p| {
            let h = multiheight(&p);
            for (c, w) in acc.iter_mut().zip(&windows) {
                *c += in_window(&h, w).unwrap_or(false) as u64;
            }
        },
        |acc, other| acc.iter_mut().zip(other).for_each(|(a, b)| *a += b),
    )?;
    Ok(summarize(ratio_rows(desc, template, t_grid, &counts)?))
}
