//! Named and parsed centers.
//!
//! Accepted forms:
//! - `golden`, `sqrt2`, `sqrt2m1`, `liouville`: lines of Gr(1,2) through
//!   `(1, φ)`, `(1, √2)`, `(1, √2 − 1)` and `(1, Σ_{k≤4} 10^{−k!})`;
//! - `random:<seed>`;
//! - `rational:<rows>` with integer rows separated by `;` (spanning rows,
//!   an isotropic vector, or line and plane normal for flags);
//! - `coords:<rows>` with real rows; entries are decimals, `sqrtN` or `phi`.

use crate::error::{Error, Result};
use crate::numeric::{dd, div_dd, DD};
use crate::varieties::{Family, RationalPoint, RealPoint, VarietyDescriptor};

fn bad(s: &str) -> Error {
    Error::InvalidParameter(format!("center `{s}`"))
}

fn golden() -> DD {
    (dd(1.0) + dd(5.0).sqrt()) * 0.5
}

/// `0.110001000000000000000001`
fn liouville() -> DD {
    let num = dd(110001.0) * 1e18 + dd(1.0);
    div_dd(div_dd(num, dd(1e12)), dd(1e12))
}

fn entry(tok: &str) -> Option<DD> {
    let tok = tok.trim();
    if tok == "phi" {
        return Some(golden());
    }
    if let Some(n) = tok.strip_prefix("sqrt") {
        let n: f64 = n.parse().ok()?;
        return (n >= 0.0).then(|| dd(n).sqrt());
    }
    if let Some(rest) = tok.strip_prefix("-sqrt") {
        return entry(&format!("sqrt{rest}")).map(|v| -v);
    }
    tok.parse::<f64>().ok().filter(|v| v.is_finite()).map(dd)
}

fn rows<T>(body: &str, parse: impl Fn(&str) -> Option<T>) -> Option<Vec<Vec<T>>> {
    body.split(';').map(|r| r.split(',').map(&parse).collect::<Option<Vec<T>>>()).collect()
}

fn from_rows(desc: &VarietyDescriptor, r: &[Vec<DD>]) -> Result<RealPoint> {
    match desc.family {
        Family::Grassmannian { l, d } => {
            if r.len() != l || r.iter().any(|v| v.len() != d) {
                return Err(Error::DimensionMismatch { expected: d, got: r.first().map_or(0, |v| v.len()) });
            }
            RealPoint::subspace(r)
        }
        Family::SplitQuadric { n } => match r {
            [v] if v.len() == n => RealPoint::quadric(v),
            _ => Err(Error::DimensionMismatch { expected: n, got: r.first().map_or(0, |v| v.len()) }),
        },
        Family::FullFlag3 => match r {
            [a, b] => RealPoint::flag(a, b),
            _ => Err(Error::InvalidParameter("a flag needs a line and a plane normal".into())),
        },
    }
}

pub fn parse_center(desc: &VarietyDescriptor, spec: &str) -> Result<RealPoint> {
    let spec = spec.trim();
    let line = |b: DD| {
        if desc.family != (Family::Grassmannian { l: 1, d: 2 }) {
            return Err(Error::InvalidParameter(format!("center `{spec}` lives on Gr(1,2)")));
        }
        RealPoint::subspace(&[vec![dd(1.0), b]])
    };
    match spec {
        "golden" => return line(golden()),
        "sqrt2" => return line(dd(2.0).sqrt()),
        "sqrt2m1" => return line(dd(2.0).sqrt() - dd(1.0)),
        "liouville" => return line(liouville()),
        _ => {}
    }
    let (kind, body) = spec.split_once(':').ok_or_else(|| bad(spec))?;
    match kind {
        "random" => RealPoint::random(desc, body.trim().parse().map_err(|_| bad(spec))?),
        "rational" => {
            let r = rows(body, |t| t.trim().parse::<i64>().ok()).ok_or_else(|| bad(spec))?;
            let p = match (desc.family, r.as_slice()) {
                (Family::Grassmannian { .. }, _) => RationalPoint::subspace(&r)?,
                (Family::SplitQuadric { .. }, [v]) => RationalPoint::quadric(v)?,
                (Family::FullFlag3, [a, b]) if a.len() == 3 && b.len() == 3 => RationalPoint::flag(a, b)?,
                _ => return Err(bad(spec)),
            };
            RealPoint::from_rational(desc, &p)
        }
        "coords" => from_rows(desc, &rows(body, entry).ok_or_else(|| bad(spec))?),
        _ => Err(bad(spec)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::varieties::Provenance;

    #[test]
    fn named_lines() {
        let desc = VarietyDescriptor::grassmannian(1, 2).unwrap();
        let x = parse_center(&desc, "golden").unwrap();
        let c = &x.frame_dd()[0];
        let phi = div_dd(c[1], c[0]);
        assert!((phi * phi - phi - dd(1.0)).abs().hi() < 1e-30);
        let l = liouville();
        assert!(((l * 1e6 - dd(110001.0)) * 1e18 - dd(1.0)).abs().hi() < 1e-9);
        assert!(parse_center(&VarietyDescriptor::grassmannian(1, 3).unwrap(), "golden").is_err());
    }

    #[test]
    fn parsed_forms() {
        let g24 = VarietyDescriptor::grassmannian(2, 4).unwrap();
        let x = parse_center(&g24, "coords:1,sqrt2,sqrt3,sqrt5;sqrt7,1,sqrt2,sqrt3").unwrap();
        assert!(x.frame_defect() < 1e-28);
        let r = parse_center(&g24, "rational:1,0,0,0;0,1,0,0").unwrap();
        assert_eq!(r.provenance, Provenance::Rational);
        let q = VarietyDescriptor::split_quadric(4).unwrap();
        assert!(parse_center(&q, "rational:1,1,0,1").is_ok());
        assert!(parse_center(&q, "rational:1,1,1,1").is_err());
        let f = VarietyDescriptor::full_flag3();
        assert!(parse_center(&f, "rational:1,0,0;0,0,1").is_ok());
        assert!(parse_center(&f, "random:4").is_ok());
        for bad in ["", "nope", "random:x", "coords:1,2", "coords:1,a;1,2,3,4", "rational:1,2,3,4"] {
            assert!(parse_center(&g24, bad).is_err(), "{bad}");
        }
    }
}
