use clap::Args;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use flagzoom::heights::WindowSpec;
use flagzoom::varieties::{EnumConfig, VarietyDescriptor};

use crate::CliError;

/// Parameters shared by all subcommands. Each one reads what it needs.
#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Params {
    /// `gr:l:d`, `quadric:n` or `flag3`.
    #[arg(long)]
    pub variety: Option<String>,
    /// Height bound(s), one per height generator.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub hmax: Option<Vec<f64>>,
    /// Abort when the predicted point count exceeds this.
    #[arg(long)]
    pub max_points: Option<u64>,
    /// Grid as `start:stop:step` or a comma list (heights for `count`,
    /// times otherwise).
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// `b=0`, `b=1`, ... fixes the log-log exponent; `free` fits it.
    #[arg(long)]
    pub fit: Option<String>,
    /// `cap` or `moving`.
    #[arg(long)]
    pub window: Option<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub d0_lo: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub d0_hi: Option<Vec<f64>>,
    /// Direction of the moving window.
    #[arg(long, value_delimiter = ',')]
    pub u: Option<Vec<f64>>,
    /// `golden`, `sqrt2`, `sqrt2m1`, `liouville`, `random[:seed]`,
    /// `rational:<rows>` or `coords:<rows>` (rows separated by `;`).
    #[arg(long)]
    pub center: Option<String>,
    /// Seed for `random` centers.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    pub tau: Option<Vec<f64>>,
    /// Half-width of the zoom box (a cube in chart coordinates).
    #[arg(long)]
    pub box_radius: Option<f64>,
    /// Write the zoomed point clouds (needs --out-dir).
    #[arg(long)]
    pub dump_cloud: Option<bool>,
    /// Height bound of the genericity scan.
    #[arg(long)]
    pub bound: Option<f64>,
    /// Singular-value threshold of the genericity scan.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Smallest record height used by the exponent fit.
    #[arg(long)]
    pub h_min: Option<f64>,
}

macro_rules! over {
    ($a:ident, $b:ident, $($f:ident),*) => { Params { $($f: $a.$f.or($b.$f)),* } };
}

impl Params {
    /// `self` with gaps filled from `base`.
    pub fn over(self, base: Params) -> Params {
        over!(
            self, base, variety, hmax, max_points, grid, fit, window, d0_lo, d0_hi, u, center, seed, tau, box_radius,
            dump_cloud, bound, tol, h_min
        )
    }

    pub fn variety(&self) -> Result<VarietyDescriptor, CliError> {
        let v = self.variety.as_deref().ok_or_else(|| CliError::Config("--variety is required".into()))?;
        Ok(v.parse()?)
    }

    pub fn hmax(&self, desc: &VarietyDescriptor) -> Result<Vec<f64>, CliError> {
        let h = self.hmax.clone().ok_or_else(|| CliError::Config("--hmax is required".into()))?;
        if h.len() == 1 && desc.pic_rank > 1 {
            return Ok(vec![h[0]; desc.pic_rank]);
        }
        Ok(h)
    }

    pub fn enum_config(&self) -> EnumConfig {
        let mut cfg = EnumConfig::default();
        if let Some(m) = self.max_points {
            cfg.max_points = m;
        }
        cfg
    }

    pub fn grid(&self) -> Result<Option<Vec<f64>>, CliError> {
        self.grid.as_deref().map(parse_grid).transpose()
    }

    pub fn center_spec(&self) -> Result<String, CliError> {
        let c = self.center.as_deref().ok_or_else(|| CliError::Config("--center is required".into()))?;
        Ok(if c == "random" { format!("random:{}", self.seed.unwrap_or(0)) } else { c.to_string() })
    }

    /// Window shape; a cap unless `--window moving`.
    pub fn template(&self, desc: &VarietyDescriptor) -> Result<WindowSpec, CliError> {
        match self.window.as_deref().unwrap_or("cap") {
            "cap" => Ok(WindowSpec::Cap { t: 0.0 }),
            "moving" => {
                let k = desc.pic_rank;
                let w = WindowSpec::MovingBox {
                    d0_lo: self.d0_lo.clone().unwrap_or_else(|| vec![0.0; k]),
                    d0_hi: self.d0_hi.clone().unwrap_or_else(|| vec![1.0; k]),
                    u: self.u.clone().unwrap_or_else(|| vec![1.0; k]),
                    t: 0.0,
                };
                w.validate()?;
                Ok(w)
            }
            other => Err(CliError::Config(format!("unknown window `{other}`"))),
        }
    }
}

/// `start:stop:step` (inclusive, up to rounding) or `a,b,c`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Config(format!("bad grid `{s}`"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = s.split(':').collect();
    let g = match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if !(step > 0.0) || !(b >= a) {
                return Err(bad());
            }
            let n = ((b - a) / step + 1e-9).floor() as usize;
            (0..=n).map(|i| a + step * i as f64).collect()
        }
        [list] => list.split(',').map(num).collect::<Result<Vec<f64>, _>>()?,
        _ => return Err(bad()),
    };
    if g.is_empty() || g.iter().any(|x| !x.is_finite()) {
        return Err(bad());
    }
    Ok(g)
}

/// SHA-256 of the subcommand and its resolved parameters. Thread count and
/// output location are not part of it.
pub fn config_hash(command: &str, p: &Params) -> String {
    let body = serde_json::to_string(&(command, p)).expect("parameters serialize");
    hex::encode(Sha256::digest(body.as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("8:14:1").unwrap(), vec![8.0, 9.0, 10.0, 11.0, 12.0, 13.0, 14.0]);
        assert_eq!(parse_grid("0:1:0.25").unwrap().len(), 5);
        assert_eq!(parse_grid("1,2.5").unwrap(), vec![1.0, 2.5]);
        for bad in ["", "1:0:1", "0:1:0", "a", "1:2"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn flags_override_config() {
        let base: Params = serde_json::from_str(r#"{"variety":"gr:1:2","hmax":[10],"tau":[0.5]}"#).unwrap();
        let flags = Params { hmax: Some(vec![20.0]), ..Params::default() };
        let p = flags.over(base);
        assert_eq!(p.variety.as_deref(), Some("gr:1:2"));
        assert_eq!(p.hmax, Some(vec![20.0]));
        assert_eq!(p.tau, Some(vec![0.5]));
        assert!(serde_json::from_str::<Params>(r#"{"bogus":1}"#).is_err());
    }

    #[test]
    fn hash_tracks_parameters() {
        let a = Params { variety: Some("gr:1:2".into()), ..Params::default() };
        let b = Params { variety: Some("gr:1:3".into()), ..Params::default() };
        assert_eq!(config_hash("count", &a), config_hash("count", &a.clone()));
        assert_ne!(config_hash("count", &a), config_hash("count", &b));
        assert_ne!(config_hash("count", &a), config_hash("zoom", &a));
        assert_eq!(config_hash("count", &a).len(), 64);
    }
}
