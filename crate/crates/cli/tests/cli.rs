use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(sub: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levy-krylov"))
        .arg(sub)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .current_dir(Path::new(env!("CARGO_MANIFEST_DIR")).join("../.."))
        .output()
        .expect("binary runs")
}

fn summary(out: &Path) -> String {
    std::fs::read_to_string(out.join("SUMMARY.csv")).unwrap()
}

#[test]
fn check_psi_stable_is_satisfied() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("check-psi", &configs().join("stable_sign_drift.json"), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(dir.path());
    assert!(s.contains("stable_sign/check-psi,satisfied,"), "{s}");
    assert!(s.contains("lambda0="));
    assert!(dir.path().join("condition.csv").exists());
}

#[test]
fn check_psi_cauchy_is_violated_but_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("check-psi", &configs().join("cauchy.json"), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(summary(dir.path()).contains("cauchy/check-psi,violated,"));
}

#[test]
fn fixed_lambda_below_threshold_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        "krylov",
        &configs().join("stable_sign_drift.json"),
        dir.path(),
        &["--set", r#"lambda={"policy":"fixed","value":0.5}"#, "--set", "solver.n_paths=10"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("lambda"));
}

#[test]
fn invalid_config_reports_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{\n  \"model\": {\"nu\": {\"variant\": \"stable_density\", \"alpha\": 1.5, \"scale\": 1.0}},\n  \"seed\": \"x\"\n}\n").unwrap();
    let o = run("sample", &cfg, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.json:3:"), "{err}");
}

#[test]
fn unknown_override_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("sample", &configs().join("compound_poisson.json"), dir.path(), &["--set", "solver.bogus=1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sample_outputs_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = configs().join("compound_poisson.json");
    let extra = ["--set", "sample.n_paths=10000", "--set", "solver.dt=0.01"];
    let oa = run("sample", &cfg, a.path(), &extra);
    let ob = run("sample", &cfg, b.path(), &extra);
    assert_eq!(oa.status.code(), Some(0), "{}", String::from_utf8_lossy(&oa.stderr));
    assert_eq!(ob.status.code(), Some(0));
    for f in ["ecf.csv", "levy_paths.csv", "paths.csv", "SUMMARY.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    // a different seed changes the draws
    let c = tempfile::tempdir().unwrap();
    run("sample", &cfg, c.path(), &[extra[0], extra[1], extra[2], extra[3], "--seed", "8"]);
    assert_ne!(std::fs::read(a.path().join("paths.csv")).unwrap(), std::fs::read(c.path().join("paths.csv")).unwrap());
}

#[test]
fn krylov_sweep_passes_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        "krylov",
        &configs().join("stable_sign_drift.json"),
        dir.path(),
        &["--set", "solver.n_paths=300", "--set", "solver.dt=0.005"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("krylov.csv")).unwrap();
    assert!(csv.starts_with("experiment_id,lhs,ci,rhs_norm,ref_const,ratio,truncation_bound,verdict\n"));
    assert_eq!(csv.lines().count(), 11);
    assert_eq!(std::fs::read_to_string(dir.path().join("krylov_local.csv")).unwrap().lines().count(), 11);
}

#[test]
fn resolvent_and_converge_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("stable_sign_drift.json");
    let o = run("resolvent", &cfg, dir.path(), &["--set", "resolvent.nt=128", "--set", "resolvent.nx=128"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(std::fs::read_to_string(dir.path().join("probes.csv")).unwrap().lines().count() == 6);

    let o = run("converge", &cfg, dir.path(), &["--set", "solver.n_paths=200", "--set", "solver.dt=0.01"]);
    assert!(matches!(o.status.code(), Some(0) | Some(1)));
    let text = std::fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    assert!(text.starts_with("# params experiment_id=stable_sign"));
    assert!(summary(dir.path()).contains("stable_sign/converge/aldous"));
}

#[test]
fn table_drift_config_loads() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        "converge",
        &configs().join("tempered_table.json"),
        dir.path(),
        &["--set", "solver.n_paths=50", "--set", "solver.dt=0.02"],
    );
    assert!(matches!(o.status.code(), Some(0) | Some(1)), "{}", String::from_utf8_lossy(&o.stderr));
}
