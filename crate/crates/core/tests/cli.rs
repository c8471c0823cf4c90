//! End-to-end runs of the `anosov-entropy` binary.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use anosov_entropy::dynamics::{coupled_lyapunov, QuadraticModel};
use anosov_entropy::gaussian::entropy_from_nu;
use anosov_entropy::scenario::{evaluate, parse_config};
use serde_json::Value;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_anosov-entropy");

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn run_in(dir: &Path, verb: &str, cfg: &Path, extra: &[&str]) -> Output {
    let mut args = vec![verb, cfg.to_str().unwrap(), "--out-dir", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("case.toml");
    fs::write(&path, text).unwrap();
    path
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

fn read_series(dir: &Path) -> (Vec<String>, Vec<[f64; 3]>) {
    let mut rdr = csv::Reader::from_path(dir.join("series.csv")).unwrap();
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr
        .records()
        .map(|r| {
            let r = r.unwrap();
            [0, 1, 2].map(|i| r[i].parse::<f64>().unwrap())
        })
        .collect();
    (header, rows)
}

fn read_table(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn qbme_bundled_run() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), "run", &config("fig1_qbme.toml"), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let raw = fs::read_to_string(dir.path().join("series.csv")).unwrap();
    assert!(raw.starts_with("t,det,entropy\n"));
    let (_, rows) = read_series(dir.path());
    assert_eq!(rows.len(), 201);
    assert!((rows[0][2] - 2.0 * 2f64.ln()).abs() < 1e-10);
    let last = rows[rows.len() - 1];
    assert_eq!(last[0], 10.0);
    assert!((last[2] - entropy_from_nu(10.0).unwrap()).abs() < 1e-3);
    let s = summary(dir.path());
    assert_eq!(s["status"], "ok");
    assert_eq!(s["kind"], "qbme");
    assert!((num(&s["entropy_asymptotic"]) - entropy_from_nu(10.0).unwrap()).abs() < 1e-15);
}

#[test]
fn ihe_line_run() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), "run", &config("fig1_iho_line.toml"), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(dir.path());
    assert_eq!(s["regime"], "UNSTABLE");
    assert!((num(&s["lyapunov"]) - 1.0).abs() < 1e-10);
    assert!(num(&s["relative_error"]) < 0.02);
    assert!((num(&s["intercept"]) - num(&s["half_log_c20"]) - 1.0).abs() < 0.05);
    assert!(num(&s["max_defect"]) < 1e-8);
    assert_eq!(s["truncated"], false);
}

#[test]
fn coupled_demo_run() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), "run", &config("coupled_demo.toml"), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(dir.path());
    assert_eq!(s["sampling"], "period_multiples");
    assert!(num(&s["relative_error"]) < 0.05);
    assert!((num(&s["normal_modes"]["alpha_plus"]) - 1.0).abs() < 1e-12);
    assert!((num(&s["normal_modes"]["alpha_minus"]) - 0.5).abs() < 1e-12);
    let (_, rows) = read_series(dir.path());
    for (i, r) in rows.iter().enumerate() {
        assert!((r[0] - 2.0 * PI * i as f64).abs() < 1e-9);
    }
}

#[test]
fn series_round_trips_exactly() {
    let dir = TempDir::new().unwrap();
    let path = config("fig1_iho_line.toml");
    assert!(run_in(dir.path(), "run", &path, &[]).status.success());
    let cfg = parse_config(&fs::read_to_string(&path).unwrap()).unwrap();
    let eval = evaluate(&cfg, &cfg.prepare().unwrap(), true).unwrap();
    let series = eval.series.unwrap();
    let (header, rows) = read_series(dir.path());
    assert_eq!(header, ["t", "det", "entropy"]);
    assert_eq!(rows.len(), series.len());
    for (i, r) in rows.iter().enumerate() {
        for (got, want) in r.iter().zip([series.times[i], series.det[i], series.entropy[i]]) {
            assert!((got - want).abs() <= 1e-12 * want.abs().max(1e-300), "row {i}");
        }
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let path = config("coupled_demo.toml");
    assert!(run_in(a.path(), "run", &path, &[]).status.success());
    assert!(run_in(b.path(), "run", &path, &["--seedless"]).status.success());
    for f in ["series.csv", "summary.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn unknown_key_is_a_parse_error_and_writes_nothing() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "[model]\nkind = \"ihe\"\nomega1_sq = 1.0\nlambda_sq = 1.0\ncoupling = 0.5\nstiffnes = 2.0\n",
    );
    let out_dir = dir.path().join("out");
    let out = run_in(&out_dir, "run", &cfg, &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("stiffnes"), "{err}");
    assert!(err.contains("\"category\":\"parse\""), "{err}");
    assert!(!out_dir.join("series.csv").exists());
    assert!(!out_dir.join("summary.json").exists());

    let cfg = write_config(dir.path(), "[model\nkind = 3\n");
    assert_eq!(run_in(&out_dir, "run", &cfg, &[]).status.code(), Some(2));
    let cfg = write_config(dir.path(), "[model]\nkind = \"qbme\"\nomega = 1.0\nk = 0.5\nn_bar = 1.0\nnu0 = 0.0\nr0 = 0.0\n[outputs]\ndir = \"x\"\n");
    let out = run_in(&out_dir, "run", &cfg, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("outputs"));
    assert!(!out_dir.join("series.csv").exists());
}

#[test]
fn precondition_failures_exit_3() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("out");
    let cases = [
        "[model]\nkind = \"qbme\"\nomega = 1.0\nk = -0.5\nn_bar = 1.0\nnu0 = 0.0\nr0 = 0.0\n",
        "[model]\nkind = \"coupled_parametric\"\nomega1_sq = 0.7\nomega2_sq = 0.4\nq = 0.1\ng = 0.2\n",
        "[model]\nkind = \"coupled_parametric\"\nomega1_sq = 0.4\nomega2_sq = 0.7\nq = 0.1\ng = 0.0\n",
        "[model]\nkind = \"ihe\"\nomega1_sq = 1.0\nlambda_sq = 1.0\ncoupling = 0.5\n[integration]\nstep = 0.0\n",
        "[model]\nkind = \"ihe\"\nomega1_sq = 1.0\nlambda_sq = 1.0\ncoupling = 0.5\n[analysis]\ntail_fraction = 1.5\n",
        "[model]\nkind = \"ihe\"\nomega1_sq = 1.0\nlambda_sq = 1.0\ncoupling = 0.5\n[analysis]\nreduced_mode = 2\n",
        "[model]\nkind = \"ihe\"\nomega1_sq = 1.0\nlambda_sq = 1.0\ncoupling = 0.5\n[analysis]\nsampling = \"period_multiples\"\n",
        "[model]\nkind = \"ihe\"\nomega1_sq = 1.0\nlambda_sq = 1.0\ncoupling = 0.5\n[[initial.modes]]\nnu = -1.0\n[[initial.modes]]\nnu = 0.0\n",
    ];
    for text in cases {
        let cfg = write_config(dir.path(), text);
        let out = run_in(&out_dir, "run", &cfg, &[]);
        assert_eq!(out.status.code(), Some(3), "{text}\n{}", String::from_utf8_lossy(&out.stderr));
        assert!(!out_dir.join("series.csv").exists(), "{text}");
        let out = run(&["validate", cfg.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(3), "{text}");
    }
}

#[test]
fn overflow_keeps_partial_output() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "[model]\nkind = \"ihe\"\nomega1_sq = 1.0\nlambda_sq = 1.0\ncoupling = 0.5\n[integration]\nt_max = 2.0\nmax_norm = 30.0\n",
    );
    let out = run_in(dir.path(), "run", &cfg, &[]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(dir.path());
    assert_eq!(s["status"], "overflow");
    assert_eq!(s["truncated"], true);
    let t_over = num(&s["overflow_time"]);
    let (_, rows) = read_series(dir.path());
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r[0] <= t_over));
}

#[test]
fn horizon_cap_is_reported() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "[model]\nkind = \"coupled_parametric\"\nomega1_sq = 0.4\nomega2_sq = 0.7\nq = 0.1\ng = 0.2\n[integration]\nt_max = 20.0\nhorizon_cap = 40.0\n",
    );
    let out = run_in(dir.path(), "run", &cfg, &[]);
    assert_eq!(out.status.code(), Some(5));
    let s = summary(dir.path());
    assert_eq!(s["status"], "horizon_cap");
    assert_eq!(num(&s["t_max_used"]), 40.0);
    assert!(dir.path().join("series.csv").exists());
}

#[test]
fn io_and_verb_errors() {
    let out = run(&["run", "/nonexistent/config.toml"]);
    assert_eq!(out.status.code(), Some(1));
    let dir = TempDir::new().unwrap();
    // sweep without a [sweep] table
    let out = run_in(dir.path(), "sweep", &config("fig1_qbme.toml"), &[]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!run(&["frobnicate"]).status.success());
}

#[test]
fn validate_accepts_bundled_configs() {
    for name in ["fig1_qbme.toml", "fig1_iho_line.toml", "coupled_demo.toml", "mathieu_tongues.toml", "coupling_scan.toml"] {
        let out = run(&["validate", config(name).to_str().unwrap()]);
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["status"], "valid");
    }
}

/// Trace of the Mathieu monodromy over one period by a plain RK4.
fn mathieu_trace(alpha: f64, q: f64) -> f64 {
    let n = 4000;
    let h = PI / n as f64;
    let f = |t: f64, y: [f64; 4]| {
        let k = alpha - 2.0 * q * (2.0 * t).cos();
        [y[1], -k * y[0], y[3], -k * y[2]]
    };
    let mut y = [1.0, 0.0, 0.0, 1.0];
    for i in 0..n {
        let t = i as f64 * h;
        let add = |a: [f64; 4], b: [f64; 4], s: f64| [0, 1, 2, 3].map(|j| a[j] + s * b[j]);
        let k1 = f(t, y);
        let k2 = f(t + h / 2.0, add(y, k1, h / 2.0));
        let k3 = f(t + h / 2.0, add(y, k2, h / 2.0));
        let k4 = f(t + h, add(y, k3, h));
        y = [0, 1, 2, 3].map(|j| y[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]));
    }
    y[0] + y[3]
}

#[test]
fn tongue_sweep_matches_monodromy_trace() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "[model]\nkind = \"single_parametric\"\nalpha = 1.0\nq = 0.0\n[sweep]\n\
         [[sweep.axes]]\nparam = \"alpha\"\nstart = 0.0\nstop = 6.0\npoints = 25\n\
         [[sweep.axes]]\nparam = \"model.q\"\nstart = 0.0\nstop = 1.0\npoints = 5\n",
    );
    let out = run_in(dir.path(), "sweep", &cfg, &["--workers", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_table(&dir.path().join("sweep.csv"));
    assert_eq!(header, ["alpha", "model.q", "lyapunov", "regime", "fitted_slope", "intercept", "relative_error", "status"]);
    assert_eq!(rows.len(), 125);
    let mut unstable = 0;
    for (i, r) in rows.iter().enumerate() {
        let alpha: f64 = r[0].parse().unwrap();
        let q: f64 = r[1].parse().unwrap();
        assert_eq!(alpha, 6.0 * (i / 5) as f64 / 24.0);
        assert_eq!(q, (i % 5) as f64 / 4.0);
        assert_eq!(r[7], "ok");
        let half = 0.5 * mathieu_trace(alpha, q).abs();
        if (half - 1.0).abs() < 1e-6 {
            continue; // band edge
        }
        let lyap: f64 = r[2].parse().unwrap();
        let want = if half > 1.0 { (half + (half * half - 1.0).sqrt()).ln() / PI } else { 0.0 };
        assert!((lyap - want).abs() < 1e-8, "alpha {alpha} q {q}: {lyap} vs {want}");
        assert_eq!(r[3], if half > 1.0 { "UNSTABLE" } else { "STABLE" });
        unstable += usize::from(half > 1.0);
    }
    assert!(unstable > 10);
}

#[test]
fn worker_count_does_not_change_the_table() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let cfg = write_config(
        a.path(),
        "[model]\nkind = \"single_parametric\"\nalpha = 1.0\nq = 0.0\n[output]\ntable = \"t.csv\"\n[sweep]\nworkers = 1\n\
         [[sweep.axes]]\nparam = \"alpha\"\nstart = 0.5\nstop = 5.0\npoints = 19\n\
         [[sweep.axes]]\nparam = \"q\"\nvalues = [0.1, 0.4, 0.8]\n",
    );
    assert!(run_in(a.path(), "sweep", &cfg, &[]).status.success());
    assert!(run_in(b.path(), "sweep", &cfg, &["--workers", "4"]).status.success());
    assert_eq!(fs::read(a.path().join("t.csv")).unwrap(), fs::read(b.path().join("t.csv")).unwrap());
}

#[test]
fn single_point_sweep_matches_run() {
    let dir = TempDir::new().unwrap();
    let base = fs::read_to_string(config("coupled_demo.toml")).unwrap();
    let cfg = write_config(dir.path(), &format!("{base}\n[sweep]\n[[sweep.axes]]\nparam = \"g\"\nvalues = [0.2]\n"));
    assert!(run_in(dir.path(), "run", &cfg, &[]).status.success());
    assert!(run_in(dir.path(), "sweep", &cfg, &[]).status.success());
    let s = summary(dir.path());
    let (_, rows) = read_table(&dir.path().join("sweep.csv"));
    assert_eq!(rows.len(), 1);
    let r = &rows[0];
    assert_eq!(r[1].parse::<f64>().unwrap(), num(&s["lyapunov"]));
    assert_eq!(r[2], s["regime"].as_str().unwrap());
    assert_eq!(r[3].parse::<f64>().unwrap(), num(&s["fitted_slope"]));
    assert_eq!(r[4].parse::<f64>().unwrap(), num(&s["intercept"]));
    assert_eq!(r[5].parse::<f64>().unwrap(), num(&s["relative_error"]));
}

#[test]
fn coupling_scan_matches_normal_mode_rates() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), "sweep", &config("coupling_scan.toml"), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (_, rows) = read_table(&dir.path().join("sweep.csv"));
    assert_eq!(rows.len(), 6);
    for r in &rows {
        let g: f64 = r[0].parse().unwrap();
        let m = QuadraticModel::coupled_parametric(0.4, 0.7, 0.1, g).unwrap();
        let want = coupled_lyapunov(&m, 1e-3).unwrap();
        let got: f64 = r[1].parse().unwrap();
        assert!((got - want).abs() < 1e-6, "g {g}: {got} vs {want}");
        assert_eq!(r[6], "ok");
        if r[2] == "UNSTABLE" {
            assert!(r[5].parse::<f64>().unwrap() < 0.05, "g {g}");
        } else {
            assert!(r[3].parse::<f64>().unwrap().abs() < 1e-3);
        }
    }
}

#[test]
fn failed_sweep_points_are_marked() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "[model]\nkind = \"coupled_parametric\"\nomega1_sq = 0.4\nomega2_sq = 0.7\nq = 0.1\ng = 0.2\n\
         [sweep]\n[[sweep.axes]]\nparam = \"omega2_sq\"\nvalues = [0.3, 0.7]\n",
    );
    let out = run_in(dir.path(), "sweep", &cfg, &[]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["failed_points"], 1);
    let (_, rows) = read_table(&dir.path().join("sweep.csv"));
    assert_eq!(rows[0][6], "precondition");
    assert_eq!(rows[0][1], "");
    assert_eq!(rows[1][6], "ok");

    let cfg = write_config(
        dir.path(),
        "[model]\nkind = \"single_parametric\"\nalpha = 1.0\nq = 0.0\n[sweep]\n[[sweep.axes]]\nparam = \"beta\"\nvalues = [1.0]\n",
    );
    assert_eq!(run_in(dir.path(), "sweep", &cfg, &[]).status.code(), Some(2));
}
