use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_transcrit"));
    for (k, _) in std::env::vars() {
        if k.starts_with("TCRIT_") {
            c.env_remove(k);
        }
    }
    c
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().unwrap()
}

/// Data rows of a CSV written by the tool, without the schema and header rows.
fn rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("schema_version,1"));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    (header, lines.map(|l| l.split(',').map(String::from).collect()).collect())
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

fn f(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn zero_steps_echo_the_start() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["simulate", "--x0", "-0.5", "--y0", "0.25", "--n", "0"], d.path());
    assert!(o.status.success());
    let (h, r) = rows(&d.path().join("trajectory.csv"));
    assert_eq!(r.len(), 1);
    assert_eq!(f(&r[0][col(&h, "x")]), -0.5);
    assert_eq!(f(&r[0][col(&h, "y")]), 0.25);
}

#[test]
fn canard_diagonal_stays_on_the_diagonal() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["--lambda", "1", "simulate", "--x0", "-0.3", "--y0", "-0.3", "--n", "400"], d.path());
    assert!(o.status.success());
    let (h, r) = rows(&d.path().join("trajectory.csv"));
    assert_eq!(r.len(), 401);
    for row in &r {
        assert_eq!(row[col(&h, "x")], row[col(&h, "y")]);
    }
}

#[test]
fn reruns_are_byte_identical() {
    let d = tempfile::tempdir().unwrap();
    let args = ["simulate", "--x0", "-0.8", "--y0", "0.1", "--n", "2000"];
    run(&args, &d.path().join("a"));
    run(&args, &d.path().join("b"));
    let a = std::fs::read(d.path().join("a/trajectory.csv")).unwrap();
    let b = std::fs::read(d.path().join("b/trajectory.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn scaling_chart_keeps_radius_and_step() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["chart", "--chart", "k2", "--point=-0.5,-0.3,0.3,0.0003", "--n", "200"], d.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (h, r) = rows(&d.path().join("chart_k2.csv"));
    for row in &r {
        assert_eq!(row[col(&h, "r2")], "0.3");
        assert_eq!(row[col(&h, "h2")], "0.0003");
        assert!(f(&row[col(&h, "conj_residual")]) <= 1e-12);
    }
}

#[test]
fn entry_chart_keeps_its_product() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["chart", "--chart", "k1", "--point", "1,0.1,0.01,0.0005", "--n", "200"], d.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (h, r) = rows(&d.path().join("chart_k1.csv"));
    let p0 = f(&r[0][col(&h, "product")]);
    for row in &r {
        let p = f(&row[col(&h, "product")]);
        assert!((p - p0).abs() <= 1e-15 * p0, "{p} vs {p0}");
        assert!(f(&row[col(&h, "conj_residual")]) <= 1e-12);
    }
}

#[test]
fn point_outside_the_box_is_rejected() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["chart", "--chart", "k1", "--point", "1,0.1,0.01,0.05"], d.path());
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["chart", "--chart", "k1", "--point", "1,0.1,0.01"], d.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oversized_step_is_a_usage_error() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["--h", "0.5", "verify"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(!d.path().join("report.csv").exists());
}

#[test]
fn canard_verify_skips_and_reports() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["--lambda", "1", "verify"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let (h, r) = rows(&d.path().join("report.csv"));
    let status = col(&h, "status");
    assert!(r.iter().any(|row| row[status] == "SKIP"));
    assert!(r.iter().all(|row| row[status] != "FAIL"));
    let text = std::fs::read_to_string(d.path().join("report.txt")).unwrap();
    assert!(text.contains("canard"));
}

#[test]
fn canard_sweep_is_refused() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["--lambda", "1", "sweep"], d.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn empty_grid_is_a_usage_error() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.toml");
    std::fs::write(&cfg, "sweep_values = []\n").unwrap();
    let o = bin().arg("--config").arg(&cfg).arg("--out").arg(d.path()).arg("sweep").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_config_key_is_rejected() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.toml");
    std::fs::write(&cfg, "lamda = 2.0\n").unwrap();
    let o = bin().arg("--config").arg(&cfg).arg("verify").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exit_height_exponent_lands_in_the_band() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["--lambda", "2", "--format", "svg", "sweep", "--axis", "eps"], d.path());
    assert!(o.status.success());
    let (h, r) = rows(&d.path().join("sweep_fits.csv"));
    let fit = r.iter().find(|row| row[0] == "exit_height_vs_eps").unwrap();
    let slope = f(&fit[col(&h, "slope")]);
    assert!((0.25..=0.50).contains(&slope), "{slope}");
    assert!(d.path().join("sweep_exit_height_vs_eps.svg").exists());
}

#[test]
fn entry_rate_grows_with_inverse_width() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["--lambda", "0.5", "sweep", "--axis", "delta", "--values", "0.05,0.07,0.1"], d.path());
    assert!(o.status.success());
    let (h, r) = rows(&d.path().join("sweep_fits.csv"));
    let fit = r.iter().find(|row| row[0] == "log_rate_vs_inv_nu_delta").unwrap();
    assert!(f(&fit[col(&h, "slope")]) < 0.0);
}

#[test]
fn printed_config_loads_back() {
    let d = tempfile::tempdir().unwrap();
    let o = bin().args(["--lambda", "2", "--seed", "7", "--print-config"]).output().unwrap();
    assert!(o.status.success());
    let cfg = d.path().join("run.toml");
    std::fs::write(&cfg, &o.stdout).unwrap();
    let again = bin().arg("--config").arg(&cfg).arg("--print-config").output().unwrap();
    assert_eq!(o.stdout, again.stdout);
    assert!(String::from_utf8_lossy(&o.stdout).contains("seed = 7"));
}

#[test]
fn environment_overrides_the_default() {
    let o = bin().env("TCRIT_LAMBDA", "-0.5").arg("--print-config").output().unwrap();
    let text = String::from_utf8_lossy(&o.stdout).to_string();
    assert!(text.lines().any(|l| l == "lambda = -0.5"), "{text}");
    let o = bin().env("TCRIT_LAMBDA", "-0.5").args(["--lambda", "2", "--print-config"]).output().unwrap();
    assert!(String::from_utf8_lossy(&o.stdout).lines().any(|l| l == "lambda = 2.0"));
}
