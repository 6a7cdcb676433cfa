use std::process::{Command, Output};

use serde_json::Value;

fn flagzoom(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flagzoom"))
        .args(args)
        .env("FLAGZOOM_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).expect("stderr is one JSON object")
}

#[test]
fn enumerate_small_projective_line() {
    let out = stdout(&flagzoom(&["enumerate", "--variety", "gr:1:2", "--hmax", "2.2360680"], "1"));
    let lines: Vec<&str> = out.lines().collect();
    let footer = lines.last().unwrap();
    assert!(footer.starts_with("# config-hash="));
    assert_eq!(footer.len(), "# config-hash=".len() + 64);
    // header + 8 points + footer
    assert_eq!(lines.len(), 10, "{out}");
}

#[test]
fn count_fits_quadratic_growth() {
    let out = stdout(&flagzoom(&["count", "--variety", "gr:1:2", "--hmax", "2000", "--fit", "b=0"], "2"));
    let v: Value = serde_json::from_str(&out).unwrap();
    let a = v["fit"]["a"].as_f64().unwrap();
    assert!((a - 2.0).abs() < 0.05, "a = {a}");
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn invalid_variety_is_a_validation_error() {
    let o = flagzoom(&["enumerate", "--variety", "gr:5:3", "--hmax", "3"], "1");
    assert_eq!(o.status.code(), Some(2));
    let e = stderr_json(&o);
    assert_eq!(e["exit_code"], 2);
    assert!(e["message"].as_str().unwrap().contains("variety"));

    let o = flagzoom(&["count", "--variety", "gr:1:2"], "1");
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "Config");
}

#[test]
fn budget_abort_exits_three() {
    let o = flagzoom(&["enumerate", "--variety", "gr:2:4", "--hmax", "1000"], "1");
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stderr_json(&o)["error"], "BudgetExceeded");
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"variety": "gr:1:2", "hmax": [50.0]}"#).unwrap();
    let cfg = cfg.to_str().unwrap();

    let from_file = stdout(&flagzoom(&["enumerate", "--config", cfg], "1"));
    let direct = stdout(&flagzoom(&["enumerate", "--variety", "gr:1:2", "--hmax", "50"], "1"));
    assert_eq!(from_file, direct);

    let overridden = stdout(&flagzoom(&["enumerate", "--config", cfg, "--hmax", "2.2360680"], "1"));
    assert_eq!(overridden.lines().count(), 10);

    std::fs::write(dir.path().join("bad.json"), r#"{"hmx": 3}"#).unwrap();
    let o = flagzoom(&["enumerate", "--config", dir.path().join("bad.json").to_str().unwrap()], "1");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn out_dir_holds_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = flagzoom(
        &["--out-dir", d, "zoom", "--variety", "gr:1:2", "--center", "sqrt2", "--tau", "1", "--grid", "6:9:1", "--dump-cloud", "true"],
        "2",
    );
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let csv = std::fs::read_to_string(dir.path().join("zoom.csv")).unwrap();
    let json: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("zoom.json")).unwrap()).unwrap();
    let hash = json["config_hash"].as_str().unwrap();
    assert!(csv.ends_with(&format!("# config-hash={hash}\n")));
    let cloud = std::fs::read_to_string(dir.path().join("cloud_tau1_t9.csv")).unwrap();
    let mass: usize = csv.lines().nth(4).unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert_eq!(cloud.lines().count(), mass + 2);
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let runs: [&[&str]; 4] = [
        &["enumerate", "--variety", "flag3", "--hmax", "8,8"],
        &["windows", "--variety", "gr:1:3", "--grid", "1,2,3"],
        &["beta", "--variety", "gr:1:2", "--center", "golden", "--hmax", "5000"],
        &["escape", "--variety", "gr:1:3", "--center", "random", "--seed", "4", "--grid", "0:6:1"],
    ];
    for args in runs {
        let base = stdout(&flagzoom(args, "1"));
        for t in ["4", "8"] {
            assert_eq!(stdout(&flagzoom(args, t)), base, "{args:?} with {t} threads");
        }
    }
}
