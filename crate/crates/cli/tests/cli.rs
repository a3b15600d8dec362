use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gmapprox(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gmapprox"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn csv(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn simulate_shares_the_noise_path() {
    let tmp = tempfile::tempdir().unwrap();
    let out = gmapprox(tmp.path(), &["simulate", "--paths", "200"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv(&tmp.path().join("paths.csv"));
    assert_eq!(rows[0], ["t", "X", "X2", "X4"]);
    assert_eq!(rows.len() - 1, 5001);
    let f2 = csv(&tmp.path().join("F2.csv"));
    let f4 = csv(&tmp.path().join("F4.csv"));
    assert_eq!(f2[0], ["t", "F", "f"]);
    // X - X2 = Z - F2 and X2 - X4 = F2 - F4: the noise cancels
    for k in (1..rows.len()).step_by(500) {
        let (x2, x4) = (num(&rows[k][2]), num(&rows[k][3]));
        let gap = num(&f2[k][1]) - num(&f4[k][1]);
        assert!(((x2 - x4) - gap).abs() < 1e-12, "row {k}");
    }
}

#[test]
fn noiseless_deterministic_run_gives_identical_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[sde]\nsigma = 0.0\n[grid]\nT = 0.5\ndt = 0.25\n[model]\ntype = \"deterministic\"\n\
         f = { grid = { horizon = 0.5, dt = 0.25, n_steps = 2 }, values = [0.0, 1.0, 0.5] }\n",
    );
    let out = gmapprox(tmp.path(), &["simulate", "--config", &cfg, "--paths", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv(&tmp.path().join("paths.csv"));
    for row in &rows[1..] {
        assert_eq!(row[1], row[2]);
        assert_eq!(row[2], row[3]);
    }
}

#[test]
fn bound_reports_a_summary_line() {
    let tmp = tempfile::tempdir().unwrap();
    let out = gmapprox(tmp.path(), &["bound", "--paths", "2000", "--format", "json"]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("max violation"), "{stdout}");
    let rows = csv(&tmp.path().join("bound.csv"));
    assert_eq!(rows[0], ["t", "mse", "se", "d2"]);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("bound.json")).unwrap()).unwrap();
    assert!(summary["max_violation"].as_f64().unwrap() <= 0.0);
}

#[test]
fn brownian_bound_column_matches_the_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[model]\ntype = \"brownian_drift\"\nlambda = 2.0\n");
    let out = gmapprox(tmp.path(), &["bound", "--config", &cfg, "--paths", "50"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv(&tmp.path().join("bound.csv"));
    let theta: f64 = 1.5;
    for k in (1..rows.len()).step_by(500) {
        let t = num(&rows[k][0]);
        let want = t / (2.0 * theta) + (-2.0 * theta * t).exp_m1() / (4.0 * theta * theta);
        assert!((num(&rows[k][3]) - want).abs() < 1e-12, "t = {t}");
    }
}

#[test]
fn table1_is_deterministic_and_echo_reproduces_it() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["table1", "--seed", "7", "--paths", "100", "--horizon", "1"];
    assert!(gmapprox(a.path(), &args).status.success());
    assert!(gmapprox(b.path(), &args).status.success());
    let first = fs::read(a.path().join("table1.csv")).unwrap();
    assert_eq!(first, fs::read(b.path().join("table1.csv")).unwrap());
    let rows = csv(&a.path().join("table1.csv"));
    assert_eq!(rows.len(), 6);
    assert_eq!(&rows[0][..5], ["scenario", "J2[X2]", "J2[X4]", "J4[X2]", "J4[X4]"]);

    let c = tempfile::tempdir().unwrap();
    let echo = a.path().join("config.json");
    let out = gmapprox(c.path(), &["table1", "--config", echo.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(first, fs::read(c.path().join("table1.csv")).unwrap());
}

#[test]
fn thread_count_does_not_change_results() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["costs", "--paths", "300", "--horizon", "2"];
    let mut one = args.to_vec();
    one.extend(["--threads", "1"]);
    let mut four = args.to_vec();
    four.extend(["--threads", "4"]);
    assert!(gmapprox(a.path(), &one).status.success());
    assert!(gmapprox(b.path(), &four).status.success());
    assert_eq!(
        fs::read(a.path().join("costs.csv")).unwrap(),
        fs::read(b.path().join("costs.csv")).unwrap()
    );
}

#[test]
fn table2_layout_and_json_records() {
    let tmp = tempfile::tempdir().unwrap();
    let out = gmapprox(
        tmp.path(),
        &["table2", "--paths", "50", "--horizon", "5", "--format", "json"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("table2.json")).unwrap()).unwrap();
    assert_eq!(v["records"].as_array().unwrap().len(), 12);
    assert_eq!(v["config"]["seed"], 42);
    assert!(!tmp.path().join("table2.csv").exists());
}

#[test]
fn neuron_writes_its_curves() {
    let tmp = tempfile::tempdir().unwrap();
    let out = gmapprox(tmp.path(), &["neuron", "--paths", "20", "--horizon", "10"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["V2.csv", "phi_psi.csv", "neuron_bound.csv", "firing_times.csv"] {
        assert!(tmp.path().join(name).exists(), "{name}");
    }
    let v2 = csv(&tmp.path().join("V2.csv"));
    assert_eq!(v2.len() - 1, 1001);
    assert_eq!(csv(&tmp.path().join("firing_times.csv")).len() - 1, 20);
}

#[test]
fn config_errors_exit_with_code_two() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = write_config(tmp.path(), "[sde]\ntheta = -1.0\n");
    let out = gmapprox(tmp.path(), &["approx", "--config", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sde"));

    let typo = write_config(tmp.path(), "[mc]\nn_path = 10\n");
    let out = gmapprox(tmp.path(), &["approx", "--config", &typo]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_path"));

    let coincident = write_config(tmp.path(), "[model]\ntype = \"single_shot\"\nlambda = 1.5\n");
    let out = gmapprox(tmp.path(), &["approx", "--config", &coincident]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn censoring_cap_exits_with_code_three() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[table2]\nhorizon_cap = 1.0\n");
    let out = gmapprox(
        tmp.path(),
        &["table2", "--config", &cfg, "--paths", "20", "--horizon", "1"],
    );
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}
