use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{integer_rank, lll_reduce_with_transform, IntBasis, IntVec, DEFAULT_DELTA};
use crate::error::{Error, Result};

/// Largest rank for which successive minima are computed by enumeration.
pub const EXACT_MINIMA_MAX_RANK: usize = 6;
const NODE_BUDGET: u64 = 4_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Minima {
    pub values: Vec<f64>,
    /// Integer rows (scaled by the basis denominator) realizing the minima.
    pub vectors: Vec<IntVec>,
    /// `false` when the LLL norms were returned instead (rank too large or
    /// enumeration budget exhausted).
    pub exact: bool,
}

/// A lattice vector found by enumeration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShortVector {
    pub norm2: BigInt,
    pub vector: IntVec,
    /// Coordinates with respect to the input basis.
    pub coeffs: IntVec,
}

pub fn successive_minima(b: &IntBasis) -> Result<Minima> {
    let n = b.rank();
    if n > 8 {
        return Err(Error::RankTooLarge(n));
    }
    let (red, _) = lll_reduce_with_transform(b, DEFAULT_DELTA)?;
    let denom = b.denom.to_f64().unwrap_or(f64::NAN);
    let approx = |red: &IntBasis| {
        let mut rows = red.rows.clone();
        rows.sort_by(|a, b| a.norm2().cmp(&b.norm2()).then(a.cmp(b)));
        Minima { values: rows.iter().map(|r| big_sqrt(&r.norm2()) / denom).collect(), vectors: rows, exact: false }
    };
    if n > EXACT_MINIMA_MAX_RANK {
        return Ok(approx(&red));
    }
    let bound = red.rows.iter().map(|r| r.norm2()).max().expect("nonempty basis");
    let Some(mut cands) = enumerate(&red, &bound) else { return Ok(approx(&red)) };
    cands.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let mut chosen: Vec<IntVec> = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for (norm2, v, _) in cands {
        chosen.push(v);
        if integer_rank(&chosen) == chosen.len() {
            values.push(big_sqrt(&norm2) / denom);
            if chosen.len() == n {
                break;
            }
        } else {
            chosen.pop();
        }
    }
    debug_assert_eq!(chosen.len(), n);
    Ok(Minima { values, vectors: chosen, exact: true })
}

/// All nonzero lattice vectors (one per ± pair) whose squared norm is at most
/// `(1 + rel_slack)·λ₁²`, sorted by norm.
pub fn shortest_vectors(b: &IntBasis, rel_slack: f64) -> Result<Vec<ShortVector>> {
    let (red, u) = lll_reduce_with_transform(b, DEFAULT_DELTA)?;
    let bound = red.rows[0].norm2();
    let mut cands = enumerate(&red, &bound)
        .ok_or_else(|| Error::InsufficientData("short-vector enumeration budget exhausted".into()))?;
    cands.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let cutoff = big_to_f64(&cands[0].0) * (1.0 + rel_slack);
    let n = b.rank();
    Ok(cands
        .into_iter()
        .enumerate()
        .filter(|(i, c)| *i == 0 || big_to_f64(&c.0) <= cutoff)
        .map(|(_, c)| c)
        .map(|(norm2, vector, x)| {
            let mut coeffs = IntVec::zeros(n);
            for (xi, ui) in x.iter().zip(&u) {
                for (c, uij) in coeffs.0.iter_mut().zip(&ui.0) {
                    *c += uij * xi;
                }
            }
            ShortVector { norm2, vector, coeffs }
        })
        .collect())
}

fn big_to_f64(x: &BigInt) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

fn big_sqrt(x: &BigInt) -> f64 {
    big_to_f64(x).sqrt()
}

/// Fincke–Pohst enumeration of nonzero vectors with squared norm ≤ `bound`
/// in an LLL-reduced basis. Floating Gram–Schmidt data only prunes; every
/// candidate is verified with exact arithmetic. `None` when the node budget
/// runs out.
fn enumerate(red: &IntBasis, bound: &BigInt) -> Option<Vec<(BigInt, IntVec, Vec<BigInt>)>> {
    let n = red.rank();
    let rows: Vec<Vec<f64>> = red.rows.iter().map(|r| r.to_f64()).collect();
    let scale = rows[0].iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
    let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|x| x / scale).collect()).collect();
    let mut star: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut bstar = vec![0.0; n];
    let mut mu = vec![vec![0.0; n]; n];
    for i in 0..n {
        let mut v = rows[i].clone();
        for j in 0..i {
            mu[i][j] = rows[i].iter().zip(&star[j]).map(|(a, b)| a * b).sum::<f64>() / bstar[j];
            for (x, y) in v.iter_mut().zip(&star[j]) {
                *x -= mu[i][j] * y;
            }
        }
        bstar[i] = v.iter().map(|x| x * x).sum();
        star.push(v);
    }
    let fbound = big_to_f64(bound) / (scale * scale) * (1.0 + 1e-7) + 1e-300;

    struct Ctx<'a> {
        n: usize,
        mu: &'a [Vec<f64>],
        bstar: &'a [f64],
        bound: f64,
        nodes: u64,
        out: Vec<Vec<i64>>,
    }
    fn rec(ctx: &mut Ctx, level: usize, partial: f64, x: &mut Vec<i64>) -> bool {
        let c: f64 = -(level + 1..ctx.n).map(|j| ctx.mu[j][level] * x[j] as f64).sum::<f64>();
        let r2 = (ctx.bound - partial) / ctx.bstar[level];
        if r2 < 0.0 {
            return true;
        }
        let r = r2.sqrt();
        let lo = (c - r - 1e-9).ceil() as i64;
        let hi = (c + r + 1e-9).floor() as i64;
        for xi in lo..=hi {
            ctx.nodes += 1;
            if ctx.nodes > NODE_BUDGET {
                return false;
            }
            let p = partial + (xi as f64 - c).powi(2) * ctx.bstar[level];
            if p > ctx.bound {
                continue;
            }
            x[level] = xi;
            if level == 0 {
                if x.iter().any(|&v| v != 0) && x.iter().rev().find(|&&v| v != 0).is_some_and(|&v| v > 0) {
                    ctx.out.push(x.clone());
                }
            } else if !rec(ctx, level - 1, p, x) {
                return false;
            }
        }
        x[level] = 0;
        true
    }
    let mut ctx = Ctx { n, mu: &mu, bstar: &bstar, bound: fbound, nodes: 0, out: Vec::new() };
    let mut x = vec![0i64; n];
    if !rec(&mut ctx, n - 1, 0.0, &mut x) {
        return None;
    }
    let dim = red.ambient_dim();
    let mut res = Vec::with_capacity(ctx.out.len());
    for coeffs in ctx.out {
        let mut v = IntVec::zeros(dim);
        for (xi, row) in coeffs.iter().zip(&red.rows) {
            if *xi != 0 {
                let xb = BigInt::from(*xi);
                for (a, b) in v.0.iter_mut().zip(&row.0) {
                    *a += &xb * b;
                }
            }
        }
        let n2 = v.norm2();
        if n2 <= *bound && !n2.is_zero() {
            res.push((n2, v, coeffs.into_iter().map(BigInt::from).collect()));
        }
    }
    Some(res)
}
