//! End-to-end tests of the `refprior` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_refprior"));
    c.env_remove("REFPRIOR_SEED");
    c
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(line: &str, key: &str) -> f64 {
    line.split_whitespace()
        .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {line}"))
        .parse()
        .unwrap()
}

#[test]
fn estimate_fnac_exp_is_exact() {
    let o = bin()
        .args(["estimate", "--model", "exp", "--theta", "4", "--theta0", "1", "--k", "5"])
        .args(["--estimator", "fnac", "--seed", "7"])
        .output()
        .unwrap();
    assert!(o.status.success());
    let line = stdout(&o);
    assert!((field(&line, "value") - 0.25).abs() < 1e-12);
    assert_eq!(field(&line, "half_width"), 0.0);

    let o = bin()
        .args(["estimate", "--model", "exp", "--theta", "4", "--theta0", "4", "--estimator", "fnac"])
        .output()
        .unwrap();
    assert_eq!(field(&stdout(&o), "value"), 1.0);
}

#[test]
fn estimate_missing_theta_is_usage_error() {
    let o = bin().args(["estimate", "--model", "exp"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("--theta"));
}

#[test]
fn estimate_bad_domain_is_usage_error() {
    let o = bin()
        .args(["estimate", "--model", "triangular", "--theta", "1.5"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn estimate_from_fixture_reproduces_worked_example() {
    let fixture = repo_root().join("fixtures/unif0_worked_example.txt");
    let run = |estimator: &str, theta: &str| {
        let o = bin()
            .args(["estimate", "--model", "unif0", "--theta", theta, "--theta0", "1"])
            .args(["--estimator", estimator, "--fixture"])
            .arg(&fixture)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        field(&stdout(&o), "value")
    };
    assert!((run("fk", "5") - 0.5437).abs() < 5e-4);
    assert!((run("fk", "1") - 1.5020).abs() < 5e-4);
    assert!((run("f", "5") - 0.3619).abs() < 1e-3);
}

#[test]
fn estimate_seed_from_environment() {
    let run = |seed: Option<&str>| {
        let mut c = bin();
        c.args(["estimate", "--model", "exp", "--theta", "2", "--k", "6"]);
        if let Some(s) = seed {
            c.env("REFPRIOR_SEED", s);
        }
        stdout(&c.output().unwrap())
    };
    assert_eq!(run(Some("5")), run(Some("5")));
    assert_ne!(run(Some("5")), run(Some("6")));
}

#[test]
fn estimate_csv_has_record_columns() {
    let o = bin()
        .args(["estimate", "--model", "unif_sq", "--theta", "1.5", "--estimator", "f", "--csv"])
        .output()
        .unwrap();
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[1], refprior::experiments::RECORD_COLUMNS);
    assert!(lines[2].starts_with("unif_sq,f,1.5,1.001,5,5,0.05,0,"));
}

fn write_config(dir: &Path) -> PathBuf {
    let path = dir.join("small.conf");
    std::fs::write(
        &path,
        "model = unif_sq\ntheta_grid = linear(8, 1.05, 3)\nk_values = 4, 6\nestimators = fk, f, fnac\n\
         replications = 2\nalpha = 0.1\nmaster_seed = 3\n",
    )
    .unwrap();
    path
}

#[test]
fn sweep_is_byte_identical_without_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = bin()
            .arg("sweep")
            .arg(&cfg)
            .args(["--no-timestamp", "--output"])
            .arg(&out)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        (
            std::fs::read(out.join("records.csv")).unwrap(),
            std::fs::read(out.join("summary.csv")).unwrap(),
            o.stdout,
        )
    };
    let a = run("a");
    let b = run("b");
    assert_eq!(a, b);
    let summary = String::from_utf8(a.1).unwrap();
    // header plus |k_values| · |estimators| rows
    assert_eq!(summary.lines().count(), 1 + 2 * 3);
    assert_eq!(summary.lines().next(), Some(refprior::experiments::SUMMARY_COLUMNS));
}

#[test]
fn sweep_timestamp_line_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let out = dir.path().join("ts");
    let o = bin()
        .arg("sweep")
        .arg(&cfg)
        .args(["--set", "k_values=5", "--set", "estimators=fk", "--output"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success());
    let records = std::fs::read_to_string(out.join("records.csv")).unwrap();
    assert!(records.starts_with("# generated_unix="));
    assert_eq!(stdout(&o).lines().count(), 2);

    let o = bin().arg("sweep").arg(&cfg).args(["--set", "colour=blue"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_missing_config_is_usage_error() {
    let o = bin().args(["sweep", "/nonexistent/config.conf"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn shipped_exp_config_runs() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .arg("sweep")
        .arg(repo_root().join("configs/exp_sweep.conf"))
        .args(["--no-timestamp", "--output"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 5 * 3);
    assert!(dir.path().join("records.csv").exists());
}

#[test]
fn grid_then_fit_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let o = bin().arg("grid").arg(&cfg).args(["--k", "6"]).output().unwrap();
    assert!(o.status.success());
    let records = dir.path().join("records.csv");
    std::fs::write(&records, &o.stdout).unwrap();
    // 8 grid points × 3 estimators, plus the header
    assert_eq!(stdout(&o).lines().count(), 25);

    let o = bin().arg("fit").arg("--records").arg(&records).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().nth(1).unwrap().starts_with("unif_sq,fk,6,0,"));
}

#[test]
fn selftest_passes_and_lists_golden_checks() {
    let o = bin().arg("selftest").output().unwrap();
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("fk_hat worked example theta = 5"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn selftest_fails_on_corrupted_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let good = std::fs::read_to_string(repo_root().join("fixtures/unif0_worked_example.txt")).unwrap();
    let bad = good.replace("4.832099", "3.832099");
    let path = dir.path().join("bad.txt");
    std::fs::write(&path, bad).unwrap();
    let o = bin().arg("selftest").arg("--fixture").arg(&path).output().unwrap();
    assert_ne!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("FAIL"));

    let good_path = dir.path().join("good.txt");
    std::fs::write(&good_path, good).unwrap();
    let o = bin().arg("selftest").arg("--fixture").arg(&good_path).output().unwrap();
    assert!(o.status.success());
}
