use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_krylov"));
    c.env_remove("KRYLOV_THREADS");
    c
}

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn write_config(dir: &TempDir, name: &str, json: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, json).unwrap();
    path
}

fn run(args: &[&str], config: &Path) -> Output {
    let mut c = bin();
    c.args(&args[..1]).arg("--config").arg(config).args(&args[1..]);
    c.output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn zero_trials_give_an_empty_report() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "v.json", r#"{"mode": "verify", "trials": 0}"#);
    let out = run(&["verify"], &cfg);
    assert_eq!(code(&out), 0);
    let r = json(&out);
    assert_eq!(r["suites"].as_array().unwrap().len(), 0);
    assert_eq!(r["passed"], true);
}

#[test]
fn flipped_newton_hook_fails_only_newton() {
    let dir = TempDir::new().unwrap();
    let cfg =
        write_config(&dir, "v.json", r#"{"mode": "verify", "trials": 200, "test_hooks": {"flip_newton_sign": true}}"#);
    let out = run(&["verify"], &cfg);
    assert_eq!(code(&out), 2);
    let r = json(&out);
    assert_eq!(r["failed_suites"], serde_json::json!(["newton"]));
    let newton = r["suites"].as_array().unwrap().iter().find(|s| s["name"] == "newton").unwrap();
    assert!(newton["failures"].as_u64().unwrap() > 0);
    assert!(newton["worst_margin"].as_f64().unwrap() < 0.0);
}

#[test]
fn verify_is_deterministic_and_seed_sensitive() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "v.json", r#"{"mode": "verify", "trials": 300, "seed": 9}"#);
    let a = run(&["verify"], &cfg);
    let b = run(&["verify"], &cfg);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["verify", "--seed", "10"], &cfg);
    assert_eq!(code(&c), 0);
    assert_ne!(a.stdout, c.stdout);
    assert_eq!(json(&c)["seed"], 10);
    let d = run(&["verify", "--trials", "5"], &cfg);
    assert_eq!(json(&d)["suites"][0]["cases"], 5);
}

#[test]
fn suite_filter_keeps_the_other_seeds() {
    let dir = TempDir::new().unwrap();
    let all = write_config(&dir, "a.json", r#"{"mode": "verify", "trials": 50, "seed": 3}"#);
    let one = write_config(&dir, "b.json", r#"{"mode": "verify", "trials": 50, "seed": 3, "suites": ["garding"]}"#);
    let full = json(&run(&["verify"], &all));
    let part = json(&run(&["verify"], &one));
    let garding = full["suites"].as_array().unwrap().iter().find(|s| s["name"] == "garding").unwrap();
    assert_eq!(part["suites"].as_array().unwrap().len(), 1);
    assert_eq!(&part["suites"][0], garding);
}

#[test]
fn config_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    for (name, text) in [
        ("unknown.json", r#"{"mode": "verify", "trails": 3}"#),
        ("mode.json", r#"{"mode": "solve", "trials": 3}"#),
        ("suite.json", r#"{"mode": "verify", "suites": ["nope"]}"#),
        ("syntax.json", r#"{"mode": "verify""#),
        ("range.json", r#"{"mode": "verify", "trials": 100000000000}"#),
    ] {
        let cfg = write_config(&dir, name, text);
        let out = run(&["verify"], &cfg);
        assert_eq!(code(&out), 1, "{name}");
        assert!(out.stdout.is_empty());
        assert!(!out.stderr.is_empty());
    }
    let missing = run(&["verify"], &dir.path().join("absent.json"));
    assert_eq!(code(&missing), 1);
}

#[test]
fn invalid_thread_count_exits_one() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "v.json", r#"{"mode": "verify", "trials": 0}"#);
    let out = bin().env("KRYLOV_THREADS", "zero").args(["verify", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(code(&out), 1);
    let ok = bin().env("KRYLOV_THREADS", "4").args(["verify", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(code(&ok), 0);
}

fn problem(extra: &str, alpha: &str) -> String {
    format!(r#"{{"problem": {{"n": 2, "k": 2, "points": 8, {extra} "alpha": {alpha}}}}}"#)
}

#[test]
fn cone_check_constant_background_passes() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "c.json",
        &problem(r#""chi0": {"constant": {"re": [[5, 0], [0, 5]]}},"#, r#"[{"constant": 0.1}, {"constant": 0.1}]"#),
    );
    let out = run(&["cone-check"], &cfg);
    assert_eq!(code(&out), 0);
    let r = json(&out);
    assert_eq!(r["status"], "pass");
    // σ_1(χ_0|i) − β_1 = 5 − α_1/2
    assert!((r["min_margin"].as_f64().unwrap() - 4.95).abs() < 1e-14);
    assert_eq!(r["failing"]["count"], 0);
}

#[test]
fn cone_check_boundary_is_strict() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "c.json",
        &problem(r#""chi0": {"constant": {"re": [[5, 0], [0, 5]]}},"#, r#"[{"constant": 0.1}, {"constant": 10}]"#),
    );
    let out = run(&["cone-check"], &cfg);
    assert_eq!(code(&out), 2);
    let r = json(&out);
    assert_eq!(r["status"], "margin-failure");
    assert_eq!(r["min_margin"].as_f64().unwrap(), 0.0);
    assert_eq!(r["failing"]["count"], 4096);
    assert_eq!(r["outside_cone"]["count"], 0);
}

const OUTSIDE: &str = r#""chi0": {"potential": [{"wave": [1, 0, 0, 0], "amplitude": 40}]},"#;

#[test]
fn cone_check_reports_precondition_distinctly() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", &problem(OUTSIDE, r#"[{"constant": 0.1}, {"constant": 0.1}]"#));
    let out = run(&["cone-check"], &cfg);
    assert_eq!(code(&out), 2);
    let r = json(&out);
    assert_eq!(r["status"], "precondition-failure");
    assert!(r["outside_cone"]["count"].as_u64().unwrap() > 0);
    assert_eq!(r["outside_cone"]["nodes"][0], 0);
    let dir2 = TempDir::new().unwrap();
    let solve = write_config(&dir, "s.json", &problem(OUTSIDE, r#"[{"constant": 0.1}, {"constant": 0.1}]"#));
    let out = bin().args(["solve", "--config"]).arg(&solve).arg("--out").arg(dir2.path()).output().unwrap();
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("cone violation"));
}

#[test]
fn assumption_violation_is_rejected_at_validation() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "a.json", &problem("", r#"[{"constant": 0}, {"constant": 0.3}]"#));
    for cmd in ["cone-check", "solve"] {
        let out_dir = TempDir::new().unwrap();
        let mut c = bin();
        c.arg(cmd).arg("--config").arg(&cfg);
        if cmd == "solve" {
            c.arg("--out").arg(out_dir.path());
        }
        let out = c.output().unwrap();
        assert_eq!(code(&out), 1, "{cmd}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("(ii)"));
        assert!(!out_dir.path().join("report.json").exists());
    }
}

fn solve(config: &Path) -> (Output, TempDir, Value) {
    let out_dir = TempDir::new().unwrap();
    let out = bin().args(["solve", "--config"]).arg(config).arg("--out").arg(out_dir.path()).output().unwrap();
    let text = std::fs::read_to_string(out_dir.path().join("report.json")).unwrap_or_else(|_| {
        panic!("no report: {}", String::from_utf8_lossy(&out.stderr));
    });
    let r = serde_json::from_str(&text).unwrap();
    (out, out_dir, r)
}

/// Bisection for `ã` in `σ_2(c·1) = β_0 + (β_1 + ã)·σ_1(c·1)`, `n = k = 2`.
fn scalar_root(c: f64, alpha0: f64, alpha1: f64) -> f64 {
    let (beta0, beta1) = (alpha0, alpha1 / 2.0);
    let g = |x: f64| c * c - beta0 - (beta1 + x) * 2.0 * c;
    let (mut lo, mut hi) = (-10.0, 10.0);
    assert!(g(lo) > 0.0 && g(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn constant_solve_matches_scalar_root() {
    let (out, dir, r) = solve(&shipped("constant.json"));
    assert_eq!(code(&out), 0);
    assert_eq!(r["converged"], true);
    // a = k/(n−k+1)·ã
    let a_tilde = scalar_root(1.5, 0.4, 0.3);
    assert!((r["a"].as_f64().unwrap() - 2.0 * a_tilde).abs() < 1e-12);
    assert!((r["a_tilde"].as_f64().unwrap() - a_tilde).abs() < 1e-12);
    let u = std::fs::read_to_string(dir.path().join("u.csv")).unwrap();
    let mut lines = u.lines();
    assert_eq!(lines.next().unwrap(), "index,x1,y1,x2,y2,value");
    let values: Vec<f64> = lines.map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(values.len(), 4096);
    assert!(values.iter().all(|v| v.abs() < 1e-12));
}

#[test]
fn shipped_manufactured_config_converges() {
    let (out, dir, r) = solve(&shipped("manufactured.json"));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(r["converged"], true);
    assert!(r["a"].as_f64().unwrap().abs() <= 1e-6);
    assert!(r["residual_linf"].as_f64().unwrap() <= 1e-9);
    let m = &r["manufactured"];
    assert!(m["error_linf"].as_f64().unwrap() <= m["bound"].as_f64().unwrap());
    assert_eq!(r["integral_gap"]["within_bound"], true);
    let path = r["path"].as_array().unwrap();
    assert_eq!(path.len(), 21);
    assert_eq!(path.last().unwrap()["stage"], 2);
    assert_eq!(path.last().unwrap()["t"], 1.0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    for key in ["a:", "residual_linf:", "residual_l2:", "min_cone_margin:"] {
        assert!(stdout.contains(key), "{stdout}");
    }
    let chi = std::fs::read_to_string(dir.path().join("chi.csv")).unwrap();
    assert_eq!(
        chi.lines().next().unwrap(),
        "index,x1,y1,x2,y2,re_1_1,im_1_1,re_1_2,im_1_2,re_2_1,im_2_1,re_2_2,im_2_2"
    );
    let eig = std::fs::read_to_string(dir.path().join("eigen_range.csv")).unwrap();
    let mut lines = eig.lines();
    assert_eq!(lines.next().unwrap(), "index,x1,y1,x2,y2,lambda_min,lambda_max");
    for line in lines {
        let f: Vec<f64> = line.split(',').skip(5).map(|x| x.parse().unwrap()).collect();
        assert!(f[0] <= f[1] && f[0] + f[1] > 0.0);
    }
}

#[test]
fn solve_report_is_byte_identical() {
    let (_, a, _) = solve(&shipped("manufactured.json"));
    let (_, b, _) = solve(&shipped("manufactured.json"));
    for file in ["report.json", "u.csv", "chi.csv", "eigen_range.csv"] {
        assert_eq!(std::fs::read(a.path().join(file)).unwrap(), std::fs::read(b.path().join(file)).unwrap(), "{file}");
    }
}

#[test]
fn shipped_cone_check_and_verify_configs_parse() {
    let out = run(&["cone-check"], &shipped("cone_check.json"));
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["status"], "pass");
    let out = run(&["verify", "--trials", "20"], &shipped("verify.json"));
    assert_eq!(code(&out), 0);
}
