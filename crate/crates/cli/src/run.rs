use std::io::Write;
use std::path::PathBuf;

use serde_json::{json, Value};

use flagzoom::centers::parse_center;
use flagzoom::counting::{collect_multiheights, count_series, fit_power_log, window_ratio_streaming, WindowFamily};
use flagzoom::diophantine::{estimate_beta, records_up_to, schubert_genericity, DEFAULT_TOL};
use flagzoom::dynamics::escape_trace;
use flagzoom::varieties::{enumerate_points, write_points_csv, VarietyDescriptor};
use flagzoom::zooming::{mass_slope, predicted_slope, uniformity_stats, zoom_cloud_for_box, ZoomBox};

use crate::params::Params;
use crate::CliError;

/// Largest zoomed cloud kept in memory for uniformity statistics and dumps.
const CLOUD_CAP: u64 = 2_000_000;

/// Artifact sink: files under `dir`, or the main artifact on stdout.
pub struct Output {
    dir: Option<PathBuf>,
    hash: String,
}

impl Output {
    pub fn new(dir: Option<PathBuf>, hash: String) -> Self {
        Output { dir, hash }
    }

    fn emit(&self, name: &str, main: bool, bytes: &[u8]) -> Result<(), CliError> {
        match &self.dir {
            Some(d) => {
                std::fs::create_dir_all(d)?;
                std::fs::write(d.join(name), bytes)?;
            }
            None if main => {
                let mut out = std::io::stdout().lock();
                out.write_all(bytes)?;
                out.flush()?;
            }
            None => {}
        }
        Ok(())
    }

    fn csv(&self, name: &str, main: bool, header: &[&str], rows: Vec<Vec<String>>) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).map_err(csv_err)?;
        for r in rows {
            w.write_record(&r).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
        self.emit(name, main, &self.footer(bytes))
    }

    fn footer(&self, mut bytes: Vec<u8>) -> Vec<u8> {
        bytes.extend_from_slice(format!("# config-hash={}\n", self.hash).as_bytes());
        bytes
    }

    fn json(&self, name: &str, main: bool, mut v: Value) -> Result<(), CliError> {
        v["config_hash"] = Value::String(self.hash.clone());
        let mut s = serde_json::to_string_pretty(&v).expect("json values serialize");
        s.push('\n');
        self.emit(name, main, s.as_bytes())
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(std::io::Error::other(e.to_string()))
}

fn fmt(x: f64) -> String {
    x.to_string()
}

fn single_height(desc: &VarietyDescriptor) -> Result<(), CliError> {
    if desc.pic_rank != 1 {
        return Err(flagzoom::Error::UnsupportedFamily(format!("{desc} has {} heights", desc.pic_rank)).into());
    }
    Ok(())
}

pub fn enumerate(p: &Params, out: &mut Output) -> Result<(), CliError> {
    let desc = p.variety()?;
    let set = enumerate_points(&desc, &p.hmax(&desc)?, &p.enum_config())?;
    let mut bytes = Vec::new();
    write_points_csv(&mut bytes, &desc, &set.points)?;
    out.emit("points.csv", true, &out.footer(bytes))
}

pub fn count(p: &Params, out: &mut Output) -> Result<(), CliError> {
    let desc = p.variety()?;
    single_height(&desc)?;
    let hmax = p.hmax(&desc)?;
    let h = hmax[0];
    let grid = match p.grid()? {
        Some(g) => g,
        None => {
            let lo = (h / 64.0).max(2.0).min(h);
            (0..=24).map(|i| lo * (h / lo).powf(i as f64 / 24.0)).collect()
        }
    };
    let b_fixed = match p.fit.as_deref().unwrap_or("b=0") {
        "free" => None,
        f => Some(
            f.strip_prefix("b=")
                .and_then(|b| b.parse::<i32>().ok())
                .ok_or_else(|| CliError::Config(format!("bad fit `{f}`")))?,
        ),
    };
    let heights = collect_multiheights(&desc, &hmax, &p.enum_config())?;
    let series = count_series(&heights, &hmax, &grid, &WindowFamily::HeightCaps)?;
    let fit = fit_power_log(&series, b_fixed)?;
    let rows = series.grid.iter().zip(&series.counts).map(|(g, c)| vec![fmt(*g), c.to_string()]).collect();
    out.csv("count.csv", false, &["H", "count"], rows)?;
    out.json(
        "count.json",
        true,
        json!({
            "variety": desc.to_string(),
            "hmax": h,
            "points": heights.len(),
            "fit": fit,
            "b_fixed": b_fixed,
            "predicted_a": desc.count_exponent(),
            "series": series.grid.iter().zip(&series.counts).map(|(g, c)| json!({"H": g, "count": c})).collect::<Vec<_>>(),
        }),
    )
}

pub fn windows(p: &Params, out: &mut Output) -> Result<(), CliError> {
    let desc = p.variety()?;
    let mut q = p.clone();
    q.window.get_or_insert_with(|| "moving".into());
    let template = q.template(&desc)?;
    let grid = p.grid()?.unwrap_or_else(|| vec![1.0, 2.0, 3.0]);
    let summary = window_ratio_streaming(&desc, &template, &grid, &p.enum_config())?;
    let rows = summary
        .rows
        .iter()
        .map(|r| vec![fmt(r.t), r.count.to_string(), fmt(r.nu), fmt(r.ratio)])
        .collect();
    out.csv("windows.csv", true, &["t", "count", "nu", "ratio"], rows)?;
    out.json(
        "windows.json",
        false,
        json!({
            "variety": desc.to_string(),
            "window": template,
            "kappa_hat": summary.kappa_hat,
            "spread": summary.spread,
            "slope": summary.slope,
            "predicted_slope": predicted_slope(&desc, 0.0, &template)?,
        }),
    )
}

pub fn zoom(p: &Params, out: &mut Output) -> Result<(), CliError> {
    let desc = p.variety()?;
    let x = parse_center(&desc, &p.center_spec()?)?;
    let taus = p.tau.clone().ok_or_else(|| CliError::Config("--tau is required".into()))?;
    let grid = p.grid()?.ok_or_else(|| CliError::Config("--grid is required".into()))?;
    let template = p.template(&desc)?;
    let bx = ZoomBox::cube(desc.dim(), p.box_radius.unwrap_or(1.0));
    let cfg = p.enum_config();
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for &tau in &taus {
        let res = mass_slope(&desc, &x, tau, &grid, &template, &bx, &cfg)?;
        for (t, m) in res.t.iter().zip(&res.mass) {
            rows.push(vec![fmt(tau), fmt(*t), m.to_string()]);
        }
        // the latest time whose box mass is small enough to materialize
        let Some(k) = (0..res.t.len()).rev().find(|&k| res.mass[k] <= CLOUD_CAP) else {
            summary.push(json!({
                "tau": tau,
                "fitted_slope": res.fit.a,
                "predicted_slope": res.predicted,
                "residual": res.fit.residual,
                "uniformity": { "error": format!("every cloud exceeds {CLOUD_CAP} points") },
            }));
            continue;
        };
        let t_last = res.t[k];
        let cloud = zoom_cloud_for_box(&desc, &x, tau, t_last, &template, &bx, &cfg)?;
        let uniformity = match uniformity_stats(&cloud, &bx) {
            Ok(u) => json!(u),
            Err(e @ flagzoom::Error::InsufficientMass { .. }) => json!({ "error": e.to_string() }),
            Err(e) => return Err(e.into()),
        };
        if p.dump_cloud.unwrap_or(false) {
            let m = desc.dim();
            let header: Vec<String> = (1..=m).map(|i| format!("z{i}")).collect();
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            let pts = cloud
                .points
                .iter()
                .map(|z| z.flat())
                .filter(|z| bx.contains(z))
                .map(|z| z.into_iter().map(fmt).collect())
                .collect();
            out.csv(&format!("cloud_tau{tau}_t{t_last}.csv"), false, &header, pts)?;
        }
        summary.push(json!({
            "tau": tau,
            "fitted_slope": res.fit.a,
            "predicted_slope": res.predicted,
            "residual": res.fit.residual,
            "uniformity_t": t_last,
            "uniformity": uniformity,
        }));
    }
    out.csv("zoom.csv", true, &["tau", "t", "mass"], rows)?;
    out.json(
        "zoom.json",
        false,
        json!({ "variety": desc.to_string(), "center": p.center_spec()?, "box": bx, "slopes": summary }),
    )
}

pub fn beta(p: &Params, out: &mut Output) -> Result<(), CliError> {
    let desc = p.variety()?;
    single_height(&desc)?;
    let spec = p.center_spec()?;
    let x = parse_center(&desc, &spec)?;
    let hmax = p.hmax(&desc)?[0];
    let h_min = p.h_min.unwrap_or(10.0);
    let cfg = p.enum_config();
    let rec = records_up_to(&desc, &x, hmax, &cfg)?;
    let est = estimate_beta(&rec, h_min)?;
    let violations = match p.bound {
        Some(b) => json!(schubert_genericity(&x, &desc, b, p.tol.unwrap_or(DEFAULT_TOL), &cfg)?.violations),
        None => json!([]),
    };
    out.json(
        "beta.json",
        true,
        json!({
            "variety": desc.to_string(),
            "center": spec,
            "hmax": hmax,
            "h_min": h_min,
            "beta_slope": est.slope,
            "beta_maxratio": est.max_ratio,
            "records_used": est.used,
            "records": rec.entries,
            "violations": violations,
        }),
    )
}

pub fn genericity(p: &Params, out: &mut Output) -> Result<(), CliError> {
    let desc = p.variety()?;
    let spec = p.center_spec()?;
    let x = parse_center(&desc, &spec)?;
    let report = schubert_genericity(&x, &desc, p.bound.unwrap_or(20.0), p.tol.unwrap_or(DEFAULT_TOL), &p.enum_config())?;
    let mut v = json!(report);
    v["center"] = json!(spec);
    out.json("genericity.json", true, v)
}

pub fn escape(p: &Params, out: &mut Output) -> Result<(), CliError> {
    let desc = p.variety()?;
    let spec = p.center_spec()?;
    let x = parse_center(&desc, &spec)?;
    let grid = p.grid()?.unwrap_or_else(|| (0..=20).map(f64::from).collect());
    let tr = escape_trace(&x, &grid)?;
    let rows = (0..tr.t.len()).map(|i| vec![fmt(tr.t[i]), fmt(tr.lambda1[i]), fmt(tr.rate[i])]).collect();
    out.csv("escape.csv", true, &["t", "lambda1", "rate"], rows)?;
    out.json(
        "escape.json",
        false,
        json!({
            "variety": desc.to_string(),
            "center": spec,
            "verdict": tr.verdict,
            "minkowski": tr.minkowski_holds(desc.ambient()),
        }),
    )
}
