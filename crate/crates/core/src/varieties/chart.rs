use serde::{Deserialize, Serialize};

use super::real::quad_b;
use super::{Family, RationalPoint, RealPoint};
use crate::error::{Error, Result};
use crate::numeric::{ddi, div_dd, DD};

/// Relative threshold below which a chart denominator counts as zero.
const CHART_EPS: f64 = 1e-13;

/// Graded tangent coordinates; `components[k]` lives in level `k+1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentVector {
    pub components: Vec<Vec<f64>>,
}

impl TangentVector {
    pub fn zeros(grading: &[usize]) -> Self {
        TangentVector { components: grading.iter().map(|&m| vec![0.0; m]).collect() }
    }

    pub fn flat(&self) -> Vec<f64> {
        self.components.iter().flatten().copied().collect()
    }
}

/// Real representative of a point in the defining representation(s).
#[derive(Clone, Debug, PartialEq)]
pub enum PointRep {
    /// Spanning rows of a subspace.
    Subspace(Vec<Vec<f64>>),
    /// Isotropic vector.
    Vector(Vec<f64>),
    /// Line vector and plane normal.
    Flag([f64; 3], [f64; 3]),
}

impl RationalPoint {
    pub fn to_rep(&self) -> PointRep {
        let f = |v: &[i64]| v.iter().map(|&x| x as f64).collect::<Vec<f64>>();
        match self {
            RationalPoint::Grassmannian { basis, .. } => PointRep::Subspace(basis.iter().map(|r| f(r)).collect()),
            RationalPoint::Quadric { vector } => PointRep::Vector(f(vector)),
            RationalPoint::Flag { line, plane } => PointRep::Flag(
                [line[0] as f64, line[1] as f64, line[2] as f64],
                [plane[0] as f64, plane[1] as f64, plane[2] as f64],
            ),
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Chart of a line: `z_j = c_j / c_0` with `c = Sᵀv`. Shared by every code
/// path that needs bitwise-identical line charts. Returns `false` outside the
/// chart.
#[inline]
pub fn line_chart(frame: &[Vec<f64>], v: &[f64], out: &mut [f64]) -> bool {
    let c0 = dot(&frame[0], v);
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if c0.abs() <= CHART_EPS * scale {
        return false;
    }
    for (j, o) in out.iter_mut().enumerate() {
        *o = dot(&frame[j + 1], v) / c0;
    }
    true
}

pub fn chart(x: &RealPoint, v: &RationalPoint) -> Result<TangentVector> {
    chart_rep(x, &v.to_rep())
}

pub fn chart_rep(x: &RealPoint, v: &PointRep) -> Result<TangentVector> {
    let s = x.frame();
    match (x.family, v) {
        (Family::Grassmannian { l: 1, d }, PointRep::Subspace(rows)) if rows.len() == 1 => {
            check_len(&rows[0], d)?;
            let mut z = vec![0.0; d - 1];
            if !line_chart(s, &rows[0], &mut z) {
                return Err(Error::NotInChart);
            }
            Ok(TangentVector { components: vec![z] })
        }
        (Family::Grassmannian { l, d }, PointRep::Subspace(rows)) if rows.len() == l => {
            rows.iter().try_for_each(|r| check_len(r, d))?;
            // C = SᵀV (d×l): C[i][j] = col_i · row_j
            let c: Vec<Vec<f64>> = (0..d).map(|i| rows.iter().map(|r| dot(&s[i], r)).collect()).collect();
            let m: Vec<Vec<f64>> = c[..l].to_vec();
            let scale: f64 = rows.iter().map(|r| dot(r, r).sqrt()).product();
            if crate::numeric::det_f64(&m).abs() <= CHART_EPS * scale {
                return Err(Error::NotInChart);
            }
            // Z = N M^{-1}: solve Mᵀ Zᵀ = Nᵀ row by row
            let mt: Vec<Vec<f64>> = (0..l).map(|i| (0..l).map(|j| m[j][i]).collect()).collect();
            let mut z = Vec::with_capacity(l * (d - l));
            for row in &c[l..] {
                z.extend(crate::numeric::solve_f64(&mt, row).ok_or(Error::NotInChart)?);
            }
            Ok(TangentVector { components: vec![z] })
        }
        (Family::SplitQuadric { n }, PointRep::Vector(v)) => {
            check_len(v, n)?;
            let c0 = quad_b(v, &s[n - 1]);
            let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if c0.abs() <= CHART_EPS * scale {
                return Err(Error::NotInChart);
            }
            let z = (1..n - 1).map(|i| -quad_b(v, &s[i]) / c0).collect();
            Ok(TangentVector { components: vec![z] })
        }
        (Family::FullFlag3, PointRep::Flag(line, normal)) => {
            let vp: Vec<f64> = (0..3).map(|i| dot(&s[i], line)).collect();
            let wp: Vec<f64> = (0..3).map(|i| dot(&s[i], normal)).collect();
            let (sl, sn) = (dot(line, line).sqrt(), dot(normal, normal).sqrt());
            if vp[0].abs() <= CHART_EPS * sl || wp[2].abs() <= CHART_EPS * sn {
                return Err(Error::NotInChart);
            }
            let a = vp[1] / vp[0];
            let b = -wp[1] / wp[2];
            let c = vp[2] / vp[0] - a * b / 2.0;
            Ok(TangentVector { components: vec![vec![a, b], vec![c]] })
        }
        _ => Err(Error::InvalidParameter("point representation does not match the center's family".into())),
    }
}

fn check_len(v: &[f64], d: usize) -> Result<()> {
    if v.len() == d {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: d, got: v.len() })
    }
}

/// Inverse of the chart: the point `s_x·e^Z·P` as a real representative.
pub fn param(x: &RealPoint, z: &TangentVector) -> Result<PointRep> {
    let s = x.frame();
    let expect = |dims: &[usize]| -> Result<()> {
        let got: Vec<usize> = z.components.iter().map(|c| c.len()).collect();
        if got == dims {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: dims.iter().sum(), got: got.iter().sum() })
        }
    };
    let combo = |coef: &[f64]| -> Vec<f64> {
        let d = s[0].len();
        (0..d).map(|r| coef.iter().zip(s).map(|(c, col)| c * col[r]).sum()).collect()
    };
    match x.family {
        Family::Grassmannian { l, d } => {
            expect(&[l * (d - l)])?;
            let zf = &z.components[0];
            // column j of [I; Z], mapped through S
            let rows = (0..l)
                .map(|j| {
                    let mut coef = vec![0.0; d];
                    coef[j] = 1.0;
                    for i in 0..d - l {
                        coef[l + i] = zf[i * l + j];
                    }
                    combo(&coef)
                })
                .collect();
            Ok(PointRep::Subspace(rows))
        }
        Family::SplitQuadric { n } => {
            expect(&[n - 2])?;
            let zf = &z.components[0];
            let mut coef = vec![0.0; n];
            coef[0] = 1.0;
            coef[1..n - 1].copy_from_slice(zf);
            coef[n - 1] = zf.iter().map(|t| t * t).sum::<f64>() / 2.0;
            Ok(PointRep::Vector(combo(&coef)))
        }
        Family::FullFlag3 => {
            expect(&[2, 1])?;
            let (a, b, c) = (z.components[0][0], z.components[0][1], z.components[1][0]);
            let l = combo(&[1.0, a, c + a * b / 2.0]);
            let n = combo(&[a * b / 2.0 - c, -b, 1.0]);
            Ok(PointRep::Flag([l[0], l[1], l[2]], [n[0], n[1], n[2]]))
        }
    }
}

/// Dilation factor `e^{k s}` of Carnot level `k`.
#[inline]
pub fn rescale_factor(level: usize, s: f64) -> f64 {
    (level as f64 * s).exp()
}

pub fn rescale(z: &TangentVector, s: f64) -> TangentVector {
    TangentVector {
        components: z
            .components
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let f = rescale_factor(k + 1, s);
                c.iter().map(|x| x * f).collect()
            })
            .collect(),
    }
}

/// `max_k |z_k|^{1/k}`
pub fn quasi_norm(z: &TangentVector) -> f64 {
    z.components
        .iter()
        .enumerate()
        .map(|(k, c)| dot(c, c).sqrt().powf(1.0 / (k + 1) as f64))
        .fold(0.0, f64::max)
}

pub fn distance(x: &RealPoint, v: &RationalPoint) -> Result<f64> {
    Ok(quasi_norm(&chart(x, v)?))
}

/// Chart distance to a rational line evaluated in double-double precision.
pub fn line_distance_dd(x: &RealPoint, v: &[i64]) -> Result<f64> {
    let s = x.frame_dd();
    let vd: Vec<DD> = v.iter().map(|&c| ddi(c)).collect();
    let c: Vec<DD> = s.iter().map(|col| crate::numeric::dot_dd(col, &vd)).collect();
    if c[0].hi() == 0.0 {
        return Err(Error::NotInChart);
    }
    let num = c[1..].iter().fold(ddi(0), |acc, cj| acc + *cj * *cj).sqrt();
    Ok(div_dd(num, c[0].abs()).hi())
}
