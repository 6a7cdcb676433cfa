//! Finite scans for rational Schubert conditions.
//!
//! Grassmannians: for every rational `W` of dimension `k` and height ≤ B,
//! `dim(x ∩ W) = k − rank(P_{x⊥} Ŵ)` is read off the singular values of the
//! `(d−l) × k` matrix of `Ŵ` in the frame of `x^⊥`; these are the sines of
//! the principal angles, so a threshold of `tol` on them is relative to the
//! unit scale of both orthonormal blocks. A Gram determinant prefilter
//! discards the bulk before any SVD.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{FromPrimitive, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactlat::{lll_reduce, IntBasis, IntVec, DEFAULT_DELTA};
use crate::numeric::{dot_dd, dd, DD};
use crate::varieties::{fold_points, EnumConfig, Family, RationalPoint, RealPoint, VarietyDescriptor};

pub const DEFAULT_TOL: f64 = 1e-9;
/// Gram determinants above this cannot hide a singular value below `tol`.
const PREFILTER: f64 = 1e-12;
/// Decimal digits kept in the integer-relation lattice.
const RELATION_DIGITS: i32 = 28;
/// Largest coefficient of an accepted integer relation.
const RELATION_MAX_COEFF: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    /// `x` meets a rational subspace in excess dimension.
    Subspace,
    /// Integer relation among the coordinates of a line.
    IntegerRelation,
    /// `x` is a rational point of the quadric.
    IsotropicLine,
    /// The line of the flag lies in a rational plane.
    LineInRationalPlane,
    /// The plane of the flag contains a rational line.
    PlaneContainsRationalLine,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Integer representative of the rational witness (Plücker coordinates
    /// then basis rows, the isotropic vector, a line, a plane normal, or the
    /// relation coefficients).
    pub witness: Vec<i64>,
    pub witness_dim: usize,
    pub dim_found: usize,
    pub dim_expected: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenericityReport {
    pub variety: String,
    pub bound: f64,
    pub tol: f64,
    /// Rational subspaces examined.
    pub checked: u64,
    pub violations: Vec<Violation>,
    pub note: String,
}

type Acc = (u64, Vec<Violation>);

fn merge(a: &mut Acc, b: Acc) {
    a.0 += b.0;
    a.1.extend(b.1);
}

/// Gram–Schmidt on at most four integer rows of length at most four.
fn orthonormal_rows(rows: &[Vec<i64>], out: &mut [[f64; 4]; 4]) {
    for (i, r) in rows.iter().enumerate() {
        let mut v = [0.0; 4];
        v.iter_mut().zip(r).for_each(|(a, &c)| *a = c as f64);
        for _ in 0..2 {
            for u in &out[..i] {
                let c: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(u).for_each(|(a, b)| *a -= c * b);
            }
        }
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        out[i] = v.map(|a| a / n);
    }
}

fn det_small(g: &[[f64; 3]; 3], n: usize) -> f64 {
    match n {
        1 => g[0][0],
        2 => g[0][0] * g[1][1] - g[0][1] * g[1][0],
        _ => {
            g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1]) - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
                + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0])
        }
    }
}

fn unit(v: &[i64]) -> Vec<f64> {
    let n = v.iter().map(|&c| (c as f64).powi(2)).sum::<f64>().sqrt();
    v.iter().map(|&c| c as f64 / n).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Excess intersection of `x` (frame columns `l..d` spanning `x^⊥`) with `W`.
fn subspace_check(perp: &[Vec<f64>], l: usize, d: usize, w: &RationalPoint, tol: f64) -> Option<Violation> {
    let RationalPoint::Grassmannian { basis, .. } = w else { return None };
    let k = basis.len();
    let mut wh = [[0.0; 4]; 4];
    orthonormal_rows(basis, &mut wh);
    let m = d - l;
    let mut dm = [[0.0; 3]; 3];
    for (a, p) in perp.iter().enumerate() {
        for j in 0..k {
            dm[a][j] = dot(p, &wh[j][..d]);
        }
    }
    let r = k.min(m);
    let mut gram = [[0.0; 3]; 3];
    for i in 0..r {
        for j in 0..r {
            gram[i][j] = if k <= m {
                (0..m).map(|a| dm[a][i] * dm[a][j]).sum()
            } else {
                (0..k).map(|b| dm[i][b] * dm[j][b]).sum()
            };
        }
    }
    if det_small(&gram, r) > PREFILTER {
        return None;
    }
    let sv = DMatrix::from_fn(m, k, |a, j| dm[a][j]).singular_values();
    let rank = sv.iter().filter(|&&s| s > tol).count();
    let expected = (l + k).saturating_sub(d);
    (rank < r).then(|| Violation {
        kind: ViolationKind::Subspace,
        witness: w.rep_coords(),
        witness_dim: k,
        dim_found: k - rank,
        dim_expected: expected,
        residual: sv.iter().copied().fold(f64::INFINITY, f64::min),
    })
}

fn dd_to_big(x: DD) -> BigInt {
    let hi = x.hi().round();
    let lo = (x - dd(hi)).hi().round();
    BigInt::from_f64(hi).expect("finite") + BigInt::from_f64(lo).expect("finite")
}

/// Integer relation `c·x = 0` among the coordinates of a line, found by LLL
/// on the rows `(e_i | round(10^28 x_i))`.
fn integer_relation(x: &RealPoint) -> Result<Option<Violation>> {
    let v = &x.frame_dd()[0];
    let d = v.len();
    let half = 10f64.powi(RELATION_DIGITS / 2);
    let rows: Vec<IntVec> = (0..d)
        .map(|i| {
            let mut r: Vec<BigInt> = (0..d).map(|j| BigInt::from((i == j) as i64)).collect();
            r.push(dd_to_big(v[i] * half * half));
            IntVec(r)
        })
        .collect();
    let red = lll_reduce(&IntBasis::new(rows)?, DEFAULT_DELTA)?;
    let Some(c) = red.rows[0].0[..d].iter().map(|b| b.to_i64()).collect::<Option<Vec<i64>>>() else {
        return Ok(None);
    };
    let size = c.iter().map(|&a| (a as f64).powi(2)).sum::<f64>().sqrt();
    if size == 0.0 || size > RELATION_MAX_COEFF {
        return Ok(None);
    }
    let cd: Vec<DD> = c.iter().map(|&a| dd(a as f64)).collect();
    let res = dot_dd(&cd, v).abs().hi() / size;
    Ok((res <= 1e-20).then(|| Violation {
        kind: ViolationKind::IntegerRelation,
        witness: c,
        witness_dim: d - 1,
        dim_found: 1,
        dim_expected: 0,
        residual: res,
    }))
}

/// Rational Schubert conditions met by `x` at height ≤ `bound`.
pub fn schubert_genericity(
    x: &RealPoint,
    desc: &VarietyDescriptor,
    bound: f64,
    tol: f64,
    cfg: &EnumConfig,
) -> Result<GenericityReport> {
    if x.family != desc.family {
        return Err(Error::InvalidParameter("center belongs to another variety".into()));
    }
    if !(bound >= 1.0) || !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("bound {bound} must be >= 1 and tol {tol} positive")));
    }
    let init = || (0u64, Vec::new());
    let (checked, mut violations) = match desc.family {
        Family::Grassmannian { l, d } => {
            let perp: Vec<Vec<f64>> = x.frame()[l..].to_vec();
            let mut acc = init();
            for k in 1..d {
                let wk = VarietyDescriptor::grassmannian(k, d)?;
                let part = fold_points(
                    &wk,
                    &[bound],
                    cfg,
                    init,
                    |a: &mut Acc, w| {
                        a.0 += 1;
                        a.1.extend(subspace_check(&perp, l, d, &w, tol));
                    },
                    merge,
                )?;
                merge(&mut acc, part);
            }
            if l == 1 {
                acc.1.extend(integer_relation(x)?);
            }
            acc
        }
        Family::SplitQuadric { .. } => {
            // The forms have real Witt index one, so the rational isotropic
            // subspaces are the rational points themselves.
            let xh = {
                let c = &x.frame()[0];
                let n = dot(c, c).sqrt();
                c.iter().map(|a| a / n).collect::<Vec<f64>>()
            };
            fold_points(
                desc,
                &[bound],
                cfg,
                init,
                |a: &mut Acc, w| {
                    a.0 += 1;
                    let RationalPoint::Quadric { vector } = &w else { return };
                    let u = unit(vector);
                    let c = dot(&u, &xh);
                    let sin = xh.iter().zip(&u).map(|(p, q)| (p - c * q).powi(2)).sum::<f64>().sqrt();
                    if sin <= tol {
                        a.1.push(Violation {
                            kind: ViolationKind::IsotropicLine,
                            witness: vector.clone(),
                            witness_dim: 1,
                            dim_found: 1,
                            dim_expected: 0,
                            residual: sin,
                        });
                    }
                },
                merge,
            )?
        }
        Family::FullFlag3 => {
            let (line, normal) = (x.frame()[0].clone(), x.frame()[2].clone());
            let gr13 = VarietyDescriptor::grassmannian(1, 3)?;
            // each primitive vector is read both as a plane normal and as a line
            fold_points(
                &gr13,
                &[bound],
                cfg,
                init,
                |a: &mut Acc, w| {
                    let RationalPoint::Grassmannian { plucker: v, .. } = &w else { return };
                    a.0 += 2;
                    let u = unit(v);
                    for (kind, against, wd) in [
                        (ViolationKind::LineInRationalPlane, &line, 2),
                        (ViolationKind::PlaneContainsRationalLine, &normal, 1),
                    ] {
                        let r = dot(&u, against).abs();
                        if r <= tol {
                            a.1.push(Violation {
                                kind,
                                witness: v.clone(),
                                witness_dim: wd,
                                dim_found: 1,
                                dim_expected: 0,
                                residual: r,
                            });
                        }
                    }
                },
                merge,
            )?
        }
    };
    violations.sort_by(|a, b| {
        (a.witness_dim, a.kind as u8, &a.witness).cmp(&(b.witness_dim, b.kind as u8, &b.witness))
    });
    let note = if violations.is_empty() {
        format!("no violation with height <= {bound}; inconclusive beyond")
    } else {
        format!("{} violation(s)", violations.len())
    };
    Ok(GenericityReport { variety: desc.to_string(), bound, tol, checked, violations, note })
}
