use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{Family, RationalPoint, VarietyDescriptor};
use crate::error::{Error, Result};
use crate::numeric::{dd, ddi, div_dd, dot_dd, norm_dd, normalize_dd, orthonormal_completion, residual, to_f64, DD};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    RandomSeeded { seed: u64 },
    ExplicitCoordinates,
    Rational,
}

/// A real point together with an adapted frame.
///
/// Frame columns: Grassmannians `(S₁ | S₂)` with `S₁` spanning the point;
/// full flags `(ℓ̂, n̂×ℓ̂, n̂)`; quadrics the Witt frame `(x̂, f₁.., ŷ)` with
/// `q(x̂)=q(ŷ)=0`, `B(x̂,ŷ)=1`, `−B(f_i,f_j)=δ_ij`, normalized by the majorant
/// `M(v) = B(v, σv)`, `σ(x₁,…,xₙ) = (xₙ,−x₂,…,−x_{n−1},x₁)`, with `M(x̂) = 1/2`.
#[derive(Clone, Debug)]
pub struct RealPoint {
    pub family: Family,
    pub provenance: Provenance,
    pub rational: Option<RationalPoint>,
    frame: Vec<Vec<DD>>,
    frame64: Vec<Vec<f64>>,
}

/// Bilinear form of `q(x) = x₁xₙ − Σ x_i²` (so `q(x) = B(x,x)`).
pub(crate) fn quad_b<T>(x: &[T], y: &[T]) -> T
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Sub<Output = T> + std::ops::Mul<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let n = x.len();
    let mut s = (x[0] * y[n - 1] + x[n - 1] * y[0]) * 0.5;
    for i in 1..n - 1 {
        s = s - x[i] * y[i];
    }
    s
}

fn sigma(x: &[DD]) -> Vec<DD> {
    let n = x.len();
    (0..n)
        .map(|i| match i {
            0 => x[n - 1],
            i if i == n - 1 => x[0],
            i => -x[i],
        })
        .collect()
}

impl RealPoint {
    fn build(family: Family, frame: Vec<Vec<DD>>, provenance: Provenance, rational: Option<RationalPoint>) -> Self {
        let frame64 = frame.iter().map(|c| to_f64(c)).collect();
        RealPoint { family, provenance, rational, frame, frame64 }
    }

    /// Point of Gr(l,d) spanned by the given rows.
    pub fn subspace(rows: &[Vec<DD>]) -> Result<Self> {
        let l = rows.len();
        let d = rows.first().map_or(0, |r| r.len());
        if l == 0 || l >= d || d > 4 || rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidParameter(format!("{l} rows in dimension {d}")));
        }
        let mut ortho: Vec<Vec<DD>> = Vec::new();
        for r in rows {
            let res = residual(r, &ortho);
            if norm_dd(&res).hi() <= 1e-24 * norm_dd(r).hi() {
                return Err(Error::DependentRows);
            }
            ortho.push(normalize_dd(&res));
        }
        let frame = orthonormal_completion(&ortho, d);
        Ok(Self::build(Family::Grassmannian { l, d }, frame, Provenance::ExplicitCoordinates, None))
    }

    /// Real point of the quadric through a (numerically) isotropic vector.
    pub fn quadric(v: &[DD]) -> Result<Self> {
        let n = v.len();
        if !(4..=6).contains(&n) {
            return Err(Error::InvalidParameter(format!("quadric vector of length {n}")));
        }
        let m = quad_b(v, &sigma(v));
        if m.hi() <= 0.0 || quad_b(v, v).abs().hi() > 1e-20 * m.hi() {
            return Err(Error::InvalidParameter("vector is not isotropic".into()));
        }
        let s = div_dd(dd(0.5), m).sqrt();
        let xh: Vec<DD> = v.iter().map(|c| *c * s).collect();
        let yh: Vec<DD> = sigma(&xh).iter().map(|c| *c * 2.0).collect();
        let proj = |u: &[DD]| -> Vec<DD> {
            let (a, b) = (quad_b(u, &yh), quad_b(u, &xh));
            u.iter().zip(&xh).zip(&yh).map(|((ui, xi), yi)| *ui - a * *xi - b * *yi).collect()
        };
        // orthonormal basis of W = {x̂,ŷ}^⊥ for −B, completed from coordinate vectors
        let mut fs: Vec<Vec<DD>> = Vec::new();
        while fs.len() < n - 2 {
            let mut best: Option<(f64, Vec<DD>)> = None;
            for i in 0..n {
                let e: Vec<DD> = (0..n).map(|j| dd(if i == j { 1.0 } else { 0.0 })).collect();
                let mut r = proj(&e);
                for _ in 0..2 {
                    for f in &fs {
                        let c = -quad_b(&r, f);
                        r.iter_mut().zip(f).for_each(|(x, y)| *x -= c * *y);
                    }
                }
                let nr = -quad_b(&r, &r).hi();
                if best.as_ref().is_none_or(|(b, _)| nr > *b + 1e-12) {
                    best = Some((nr, r));
                }
            }
            let (_, r) = best.expect("n > 2");
            let nr = (-quad_b(&r, &r)).sqrt();
            fs.push(r.iter().map(|x| div_dd(*x, nr)).collect());
        }
        let mut frame = vec![xh];
        frame.extend(fs);
        frame.push(yh);
        Ok(Self::build(Family::SplitQuadric { n }, frame, Provenance::ExplicitCoordinates, None))
    }

    /// Complete flag from a line direction and a plane normal.
    pub fn flag(line: &[DD], normal: &[DD]) -> Result<Self> {
        if line.len() != 3 || normal.len() != 3 {
            return Err(Error::DimensionMismatch { expected: 3, got: line.len().min(normal.len()) });
        }
        let l = normalize_dd(line);
        let n = normalize_dd(normal);
        if dot_dd(&l, &n).abs().hi() > 1e-20 {
            return Err(Error::InvalidParameter("line not contained in plane".into()));
        }
        let c1 = cross_dd(&n, &l);
        let frame = vec![l, c1, n];
        Ok(Self::build(Family::FullFlag3, frame, Provenance::ExplicitCoordinates, None))
    }

    pub fn from_rational(desc: &VarietyDescriptor, p: &RationalPoint) -> Result<Self> {
        if !p.matches(desc) {
            return Err(Error::InvalidParameter("point does not belong to the variety".into()));
        }
        let to_dd = |v: &[i64]| v.iter().map(|&x| ddi(x)).collect::<Vec<DD>>();
        let mut x = match p {
            RationalPoint::Grassmannian { basis, .. } => {
                Self::subspace(&basis.iter().map(|r| to_dd(r)).collect::<Vec<_>>())?
            }
            RationalPoint::Quadric { vector } => Self::quadric(&to_dd(vector))?,
            RationalPoint::Flag { line, plane } => Self::flag(&to_dd(line), &to_dd(plane))?,
        };
        x.provenance = Provenance::Rational;
        x.rational = Some(p.clone());
        Ok(x)
    }

    /// Seeded random point (Haar-distributed frame for Grassmannians and
    /// flags; uniform on the majorant sphere for quadrics).
    pub fn random(desc: &VarietyDescriptor, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut gauss = |k: usize| -> Vec<DD> {
            (0..k).map(|_| dd(StandardNormal.sample(&mut rng))).collect()
        };
        let mut x = match desc.family {
            Family::Grassmannian { l, d } => Self::subspace(&(0..l).map(|_| gauss(d)).collect::<Vec<_>>())?,
            Family::SplitQuadric { n } => {
                // a = 1/2 and (b, x₂..x_{n−1}) on the sphere of radius 1/2
                let g = normalize_dd(&gauss(n - 1));
                let half = dd(0.5);
                let b = g[0] * half;
                let mut v = vec![half + b];
                v.extend(g[1..].iter().map(|c| *c * half));
                v.push(half - b);
                Self::quadric(&v)?
            }
            Family::FullFlag3 => {
                let l = gauss(3);
                let other = gauss(3);
                Self::flag(&l, &cross_dd(&l, &other))?
            }
        };
        x.provenance = Provenance::RandomSeeded { seed };
        Ok(x)
    }

    /// Frame columns in double-double precision.
    pub fn frame_dd(&self) -> &[Vec<DD>] {
        &self.frame
    }

    /// Frame columns rounded to `f64`.
    pub fn frame(&self) -> &[Vec<f64>] {
        &self.frame64
    }

    /// Unit representatives of the point: spanning rows for Grassmannians,
    /// `x̂` for quadrics, `(ℓ̂, n̂)` for flags.
    pub fn coordinates(&self) -> Vec<Vec<f64>> {
        match self.family {
            Family::Grassmannian { l, .. } => self.frame64[..l].to_vec(),
            Family::SplitQuadric { .. } => vec![self.frame64[0].clone()],
            Family::FullFlag3 => vec![self.frame64[0].clone(), self.frame64[2].clone()],
        }
    }

    /// Largest deviation of the frame from its defining relations
    /// (orthonormality, or the Witt relations for quadrics).
    pub fn frame_defect(&self) -> f64 {
        let k = self.frame.len();
        let mut worst = 0.0f64;
        for i in 0..k {
            for j in 0..k {
                let (got, want) = match self.family {
                    Family::SplitQuadric { .. } => {
                        let want = match (i, j) {
                            (0, j) if j == k - 1 => 1.0,
                            (i, 0) if i == k - 1 => 1.0,
                            (i, j) if i == j && i > 0 && i < k - 1 => -1.0,
                            _ => 0.0,
                        };
                        (quad_b(&self.frame[i], &self.frame[j]).hi(), want)
                    }
                    _ => (dot_dd(&self.frame[i], &self.frame[j]).hi(), if i == j { 1.0 } else { 0.0 }),
                };
                worst = worst.max((got - want).abs());
            }
        }
        worst
    }
}

pub(crate) fn cross_dd(a: &[DD], b: &[DD]) -> Vec<DD> {
    vec![a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all() -> Vec<VarietyDescriptor> {
        let mut v = Vec::new();
        for d in 2..=4 {
            for l in 1..d {
                v.push(VarietyDescriptor::grassmannian(l, d).unwrap());
            }
        }
        for n in 4..=6 {
            v.push(VarietyDescriptor::split_quadric(n).unwrap());
        }
        v.push(VarietyDescriptor::full_flag3());
        v
    }

    #[test]
    fn random_frames_satisfy_relations() {
        for desc in all() {
            for seed in 0..5 {
                let x = RealPoint::random(&desc, seed).unwrap();
                assert!(x.frame_defect() < 1e-12, "{desc} seed {seed}: {}", x.frame_defect());
                assert_eq!(x.frame().len(), desc.ambient());
            }
        }
    }

    #[test]
    fn rational_points_reconstruct() {
        let g = VarietyDescriptor::grassmannian(1, 3).unwrap();
        let p = RationalPoint::line(&[1, 2, 2]).unwrap();
        let x = RealPoint::from_rational(&g, &p).unwrap();
        let c = &x.coordinates()[0];
        for (a, b) in c.iter().zip([1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        let q = VarietyDescriptor::split_quadric(4).unwrap();
        let v = RationalPoint::quadric(&[1, 1, 1, 2]).unwrap();
        let xq = RealPoint::from_rational(&q, &v).unwrap();
        assert!(xq.frame_defect() < 1e-14);
        let c = &xq.coordinates()[0];
        // x̂ is proportional to (1,1,1,2)
        for (a, b) in c.iter().zip([1.0, 1.0, 1.0, 2.0]) {
            assert!((a / c[0] - b).abs() < 1e-14);
        }
    }

    #[test]
    fn base_frames_are_identity() {
        let x = RealPoint::subspace(&[vec![dd(1.0), dd(0.0)]]).unwrap();
        assert_eq!(x.frame(), &[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let f = RealPoint::flag(&[dd(1.0), dd(0.0), dd(0.0)], &[dd(0.0), dd(0.0), dd(1.0)]).unwrap();
        assert_eq!(f.frame(), &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);
        let q = RealPoint::quadric(&[dd(1.0), dd(0.0), dd(0.0), dd(0.0)]).unwrap();
        assert_eq!(q.frame()[0], vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(q.frame()[3], vec![0.0, 0.0, 0.0, 2.0]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RealPoint::quadric(&[dd(1.0), dd(1.0), dd(0.0), dd(0.0)]).is_err());
        assert!(RealPoint::flag(&[dd(1.0), dd(0.0), dd(0.0)], &[dd(1.0), dd(0.0), dd(0.0)]).is_err());
        assert!(RealPoint::subspace(&[vec![dd(1.0), dd(2.0)], vec![dd(2.0), dd(4.0)]]).is_err());
    }
}
