//! Supported flag varieties: descriptors, exact rational points, real points
//! with adapted frames, tangent charts and enumeration.

mod chart;
pub mod enumerate;
mod point;
mod real;

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use chart::{
    chart, chart_rep, distance, line_chart, line_distance_dd, param, quasi_norm, rescale, rescale_factor, PointRep, TangentVector,
};
pub use enumerate::{enumerate_points, fold_points, predicted_count, Coverage, EnumConfig, PointSet};
pub use point::{read_points_csv, write_points_csv, RationalPoint};
pub use real::{Provenance, RealPoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    Grassmannian { l: usize, d: usize },
    /// Null lines of `q(x) = x₁xₙ − Σ_{1<i<n} x_i²` in `Q^n`.
    SplitQuadric { n: usize },
    /// Complete flags (line ⊂ plane) in `Q^3`.
    FullFlag3,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeightGenerator {
    pub name: String,
    /// `⟨χ, Y⟩`
    pub chi_y: Ratio<i64>,
    /// `β_χ = 1/⟨χ, Y⟩`
    pub beta: Ratio<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarietyDescriptor {
    pub family: Family,
    /// `dim m_k` for the Carnot levels k = 1, 2, ...
    pub grading_dims: Vec<usize>,
    /// `⟨ρ_X, Y⟩`
    pub rho_y: u32,
    pub height_generators: Vec<HeightGenerator>,
    pub pic_rank: usize,
    /// Density exponents of ν in multiheight coordinates.
    pub rho_coords: Vec<Ratio<i64>>,
    /// Gram matrix of `2q` for quadrics.
    pub form: Option<Vec<Vec<i64>>>,
}

impl VarietyDescriptor {
    pub fn grassmannian(l: usize, d: usize) -> Result<Self> {
        if !(1 <= l && l < d && d <= 4) {
            return Err(Error::InvalidVariety(format!("Gr({l},{d}) needs 1 <= l < d <= 4")));
        }
        let dim = (l * (d - l)) as i64;
        let chi = Ratio::new(dim, d as i64);
        Ok(VarietyDescriptor {
            family: Family::Grassmannian { l, d },
            grading_dims: vec![dim as usize],
            rho_y: dim as u32,
            height_generators: vec![HeightGenerator { name: "plucker".into(), chi_y: chi, beta: chi.recip() }],
            pic_rank: 1,
            rho_coords: vec![Ratio::from_integer(d as i64)],
            form: None,
        })
    }

    pub fn split_quadric(n: usize) -> Result<Self> {
        if !(4..=6).contains(&n) {
            return Err(Error::InvalidVariety(format!("quadric in dimension {n}; supported 4..=6")));
        }
        let mut form = vec![vec![0i64; n]; n];
        form[0][n - 1] = 1;
        form[n - 1][0] = 1;
        for (i, row) in form.iter_mut().enumerate().take(n - 1).skip(1) {
            row[i] = -2;
        }
        let one = Ratio::from_integer(1);
        Ok(VarietyDescriptor {
            family: Family::SplitQuadric { n },
            grading_dims: vec![n - 2],
            rho_y: (n - 2) as u32,
            height_generators: vec![HeightGenerator { name: "isotropic".into(), chi_y: one, beta: one }],
            pic_rank: 1,
            rho_coords: vec![Ratio::from_integer(n as i64 - 2)],
            form: Some(form),
        })
    }

    pub fn full_flag3() -> Self {
        let one = Ratio::from_integer(1);
        VarietyDescriptor {
            family: Family::FullFlag3,
            grading_dims: vec![2, 1],
            rho_y: 4,
            height_generators: vec![
                HeightGenerator { name: "line".into(), chi_y: one, beta: one },
                HeightGenerator { name: "plane".into(), chi_y: one, beta: one },
            ],
            pic_rank: 2,
            rho_coords: vec![Ratio::from_integer(2), Ratio::from_integer(2)],
            form: None,
        }
    }

    pub fn from_family(family: Family) -> Result<Self> {
        match family {
            Family::Grassmannian { l, d } => Self::grassmannian(l, d),
            Family::SplitQuadric { n } => Self::split_quadric(n),
            Family::FullFlag3 => Ok(Self::full_flag3()),
        }
    }

    /// Dimension of the variety (sum of the graded dimensions).
    pub fn dim(&self) -> usize {
        self.grading_dims.iter().sum()
    }

    /// Ambient dimension of the defining representation.
    pub fn ambient(&self) -> usize {
        match self.family {
            Family::Grassmannian { d, .. } => d,
            Family::SplitQuadric { n } => n,
            Family::FullFlag3 => 3,
        }
    }

    /// Exponent `a = ⟨ρ_X,Y⟩·β` of the single-height counting law; `None`
    /// for several generators.
    pub fn count_exponent(&self) -> Option<f64> {
        match self.height_generators.as_slice() {
            [g] => Some(self.rho_y as f64 * ratio_f64(g.beta)),
            _ => None,
        }
    }

    pub fn rho_coords_f64(&self) -> Vec<f64> {
        self.rho_coords.iter().map(|r| ratio_f64(*r)).collect()
    }

    pub fn beta(&self, generator: usize) -> f64 {
        ratio_f64(self.height_generators[generator].beta)
    }
}

pub(crate) fn ratio_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

impl fmt::Display for VarietyDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::Grassmannian { l, d } => write!(f, "gr:{l}:{d}"),
            Family::SplitQuadric { n } => write!(f, "quadric:{n}"),
            Family::FullFlag3 => write!(f, "flag3"),
        }
    }
}

impl FromStr for VarietyDescriptor {
    type Err = Error;

    /// Parses `gr:l:d`, `quadric:n` or `flag3`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |p: &str| p.parse::<usize>().map_err(|_| Error::InvalidVariety(s.to_string()));
        match parts.as_slice() {
            ["gr", l, d] => Self::grassmannian(num(l)?, num(d)?),
            ["quadric", n] => Self::split_quadric(num(n)?),
            ["flag3"] => Ok(Self::full_flag3()),
            _ => Err(Error::InvalidVariety(s.to_string())),
        }
    }
}
