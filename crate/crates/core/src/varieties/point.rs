use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use super::{Family, VarietyDescriptor};
use crate::error::{Error, Result};
use crate::exactlat::small;

/// Canonical exact representative of a rational point.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RationalPoint {
    /// Primitive Plücker vector (lexicographic subsets) and the Hermite
    /// normal form basis of the saturated lattice.
    Grassmannian { plucker: Vec<i64>, basis: Vec<Vec<i64>> },
    /// Primitive isotropic vector.
    Quadric { vector: Vec<i64> },
    /// Primitive line vector and primitive normal of the plane.
    Flag { line: [i64; 3], plane: [i64; 3] },
}

/// Lexicographic `l`-subsets of `0..d`.
pub fn subsets(d: usize, l: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, d: usize, l: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == l {
            out.push(cur.clone());
            return;
        }
        for i in start..d {
            cur.push(i);
            rec(i + 1, d, l, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, d, l, &mut Vec::new(), &mut out);
    out
}

fn det_i128(m: &[Vec<i128>]) -> i128 {
    match m.len() {
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        n => (0..n)
            .map(|j| {
                let minor: Vec<Vec<i128>> =
                    m[1..].iter().map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &x)| x).collect()).collect();
                let s = if j % 2 == 0 { 1 } else { -1 };
                s * m[0][j] * det_i128(&minor)
            })
            .sum(),
    }
}

/// Maximal minors of an `l×d` integer matrix in lexicographic column order.
pub fn plucker_minors(basis: &[Vec<i64>]) -> Vec<i128> {
    let (l, d) = (basis.len(), basis[0].len());
    subsets(d, l)
        .iter()
        .map(|cols| {
            let m: Vec<Vec<i128>> = basis.iter().map(|r| cols.iter().map(|&c| r[c] as i128).collect()).collect();
            det_i128(&m)
        })
        .collect()
}

fn cross(a: &[i64; 3], b: &[i64; 3]) -> [i64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn primitive3(v: &[i64]) -> Result<[i64; 3]> {
    let p = small::primitive(v).ok_or(Error::ZeroVector)?;
    Ok([p[0], p[1], p[2]])
}

impl RationalPoint {
    /// The subspace spanned by independent integer rows.
    pub fn subspace(rows: &[Vec<i64>]) -> Result<Self> {
        let l = rows.len();
        let d = rows.first().map_or(0, |r| r.len());
        if l == 0 || l >= d {
            return Err(Error::InvalidParameter(format!("need 1 <= rows < dimension, got {l} rows in dimension {d}")));
        }
        if plucker_minors(rows).iter().all(|&m| m == 0) {
            return Err(Error::DependentRows);
        }
        let basis = small::saturate(rows, d);
        Ok(Self::from_hnf(basis))
    }

    /// Builds the point from a saturated Hermite-normal-form basis.
    pub(crate) fn from_hnf(basis: Vec<Vec<i64>>) -> Self {
        let minors: Vec<i64> = plucker_minors(&basis).into_iter().map(|m| m as i64).collect();
        let plucker = small::primitive(&minors).expect("independent rows");
        RationalPoint::Grassmannian { plucker, basis }
    }

    /// Line through a nonzero integer vector (Gr(1,d)).
    pub fn line(v: &[i64]) -> Result<Self> {
        let p = small::primitive(v).ok_or(Error::ZeroVector)?;
        Ok(RationalPoint::Grassmannian { plucker: p.clone(), basis: vec![p] })
    }

    pub fn quadric(v: &[i64]) -> Result<Self> {
        let p = small::primitive(v).ok_or(Error::ZeroVector)?;
        if quadric_value(&p) != 0 {
            return Err(Error::InvalidParameter(format!("{v:?} is not isotropic")));
        }
        Ok(RationalPoint::Quadric { vector: p })
    }

    /// Flag from a line vector and a second vector spanning the plane with it.
    pub fn flag_from_span(line: &[i64], other: &[i64]) -> Result<Self> {
        let l = primitive3(line)?;
        let n = cross(&l, &[other[0], other[1], other[2]]);
        Ok(RationalPoint::Flag { line: l, plane: primitive3(&n)? })
    }

    /// Flag from a line vector and a plane normal.
    pub fn flag(line: &[i64], normal: &[i64]) -> Result<Self> {
        let (l, n) = (primitive3(line)?, primitive3(normal)?);
        if small::dot(&l, &n) != 0 {
            return Err(Error::InvalidParameter("line not contained in plane".into()));
        }
        Ok(RationalPoint::Flag { line: l, plane: n })
    }

    /// Squared Euclidean norms of the representatives, one per generator.
    pub fn norms2(&self) -> SmallVec<[i128; 2]> {
        match self {
            RationalPoint::Grassmannian { plucker, .. } => smallvec::smallvec![small::norm2(plucker)],
            RationalPoint::Quadric { vector } => smallvec::smallvec![small::norm2(vector)],
            RationalPoint::Flag { line, plane } => smallvec::smallvec![small::norm2(line), small::norm2(plane)],
        }
    }

    /// Flattened integer representative (CSV column order).
    pub fn rep_coords(&self) -> Vec<i64> {
        match self {
            RationalPoint::Grassmannian { plucker, basis } => {
                plucker.iter().chain(basis.iter().flatten()).copied().collect()
            }
            RationalPoint::Quadric { vector } => vector.clone(),
            RationalPoint::Flag { line, plane } => line.iter().chain(plane).copied().collect(),
        }
    }

    /// Canonical order: squared norms, then the representative.
    pub fn sort_key(&self) -> (SmallVec<[i128; 2]>, Vec<i64>) {
        (self.norms2(), self.rep_coords())
    }

    pub fn matches(&self, desc: &VarietyDescriptor) -> bool {
        match (self, desc.family) {
            (RationalPoint::Grassmannian { plucker, basis }, Family::Grassmannian { l, d }) => {
                basis.len() == l && basis.iter().all(|r| r.len() == d) && plucker.len() == subsets(d, l).len()
            }
            (RationalPoint::Quadric { vector }, Family::SplitQuadric { n }) => vector.len() == n,
            (RationalPoint::Flag { .. }, Family::FullFlag3) => true,
            _ => false,
        }
    }

    /// Exact algebraic invariants: Plücker relations and consistency with the
    /// basis, isotropy, incidence, primitivity and sign canonicity.
    pub fn check_invariants(&self, desc: &VarietyDescriptor) -> bool {
        if !self.matches(desc) {
            return false;
        }
        let canonical = |v: &[i64]| small::gcd_slice(v) == 1 && small::sign_canonical(v);
        match self {
            RationalPoint::Grassmannian { plucker, basis } => {
                let minors = plucker_minors(basis);
                let mut hnf: Vec<Vec<i128>> =
                    basis.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
                small::hnf_rows(&mut hnf);
                let is_hnf = hnf.iter().zip(basis).all(|(a, b)| a.iter().zip(b).all(|(x, y)| *x == *y as i128));
                // saturated basis ⇔ primitive minors; the minors then equal the Plücker vector up to sign
                let same = minors.iter().zip(plucker).all(|(m, p)| *m == *p as i128)
                    || minors.iter().zip(plucker).all(|(m, p)| *m == -(*p as i128));
                canonical(plucker) && is_hnf && same && plucker_relations_hold(plucker, basis.len(), basis[0].len())
            }
            RationalPoint::Quadric { vector } => canonical(vector) && quadric_value(vector) == 0,
            RationalPoint::Flag { line, plane } => canonical(line) && canonical(plane) && small::dot(line, plane) == 0,
        }
    }
}

/// `x₁xₙ − Σ_{1<i<n} x_i²`
pub fn quadric_value(v: &[i64]) -> i128 {
    let n = v.len();
    v[0] as i128 * v[n - 1] as i128 - v[1..n - 1].iter().map(|&x| x as i128 * x as i128).sum::<i128>()
}

/// Quadratic Plücker relations; only Gr(2,4) has any among the supported
/// Grassmannians.
pub fn plucker_relations_hold(p: &[i64], l: usize, d: usize) -> bool {
    if (l, d) == (2, 4) {
        let q = |i: usize| p[i] as i128;
        // p12 p34 − p13 p24 + p14 p23
        q(0) * q(5) - q(1) * q(4) + q(2) * q(3) == 0
    } else {
        true
    }
}

fn header(desc: &VarietyDescriptor) -> Vec<String> {
    let mut h = vec!["variety".to_string()];
    match desc.family {
        Family::Grassmannian { l, d } => {
            for s in subsets(d, l) {
                h.push(format!("p{}", s.iter().map(|i| (i + 1).to_string()).collect::<String>()));
            }
            for r in 0..l {
                for c in 0..d {
                    h.push(format!("b{}_{}", r + 1, c + 1));
                }
            }
        }
        Family::SplitQuadric { n } => h.extend((1..=n).map(|i| format!("x{i}"))),
        Family::FullFlag3 => h.extend(["v1", "v2", "v3", "w1", "w2", "w3"].map(String::from)),
    }
    h.extend((1..=desc.pic_rank).map(|i| format!("h{i}")));
    h
}

/// Writes the point list as CSV: `variety,rep...,h1[,h2]` with log-heights.
pub fn write_points_csv<W: Write>(out: W, desc: &VarietyDescriptor, points: &[RationalPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record(header(desc)).map_err(io)?;
    let name = desc.to_string();
    for p in points {
        let mut rec = vec![name.clone()];
        rec.extend(p.rep_coords().iter().map(|x| x.to_string()));
        rec.extend(p.norms2().iter().map(|&n2| format!("{:.12}", crate::heights::log_height(n2))));
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))
}

/// Reads a point list written by [`write_points_csv`]. Lines starting with
/// `#` are ignored; heights are recomputed from the representatives.
pub fn read_points_csv<R: Read>(input: R) -> Result<(VarietyDescriptor, Vec<RationalPoint>)> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let bad = |m: String| Error::Parse(m);
    let mut desc: Option<VarietyDescriptor> = None;
    let mut points = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let name = rec.get(0).ok_or_else(|| bad("missing variety column".into()))?;
        let dsc = match &desc {
            Some(d) => d.clone(),
            None => {
                let d: VarietyDescriptor = name.parse()?;
                desc = Some(d.clone());
                d
            }
        };
        if dsc.to_string() != name {
            return Err(bad(format!("mixed varieties {dsc} and {name}")));
        }
        let ints: Vec<i64> = rec
            .iter()
            .skip(1)
            .take(rec.len() - 1 - dsc.pic_rank)
            .map(|s| s.parse::<i64>().map_err(|e| bad(format!("{s}: {e}"))))
            .collect::<Result<_>>()?;
        let p = match dsc.family {
            Family::Grassmannian { l, d } => {
                let np = subsets(d, l).len();
                if ints.len() != np + l * d {
                    return Err(bad("wrong column count".into()));
                }
                let basis: Vec<Vec<i64>> = ints[np..].chunks(d).map(|c| c.to_vec()).collect();
                RationalPoint::Grassmannian { plucker: ints[..np].to_vec(), basis }
            }
            Family::SplitQuadric { n } if ints.len() == n => RationalPoint::Quadric { vector: ints },
            Family::FullFlag3 if ints.len() == 6 => {
                RationalPoint::Flag { line: [ints[0], ints[1], ints[2]], plane: [ints[3], ints[4], ints[5]] }
            }
            _ => return Err(bad("wrong column count".into())),
        };
        if !p.check_invariants(&dsc) {
            return Err(bad(format!("row fails the exact invariants: {:?}", p.rep_coords())));
        }
        points.push(p);
    }
    let desc = desc.ok_or_else(|| bad("empty point file".into()))?;
    Ok((desc, points))
}
