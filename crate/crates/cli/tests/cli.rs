use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn csck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_csck")).args(args).output().expect("binary runs")
}

fn config_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn shat_anticanonical_is_zero() {
    let cfg = config_dir().join("shat_cp1_anticanonical.json");
    let o = csck(&["shat", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "0");
}

#[test]
fn shat_is_exact_rational() {
    let cfg = config_dir().join("shat_cp1_nonfano.json");
    let o = csck(&["shat", "--config", cfg.to_str().unwrap()]);
    assert_eq!(stdout(&o).trim(), "-3/2");
}

#[test]
fn coeffs_trivial_action_has_zero_b() {
    let cfg = config_dir().join("coeffs_cp1_trivial.json");
    let o = csck(&["coeffs", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let mut entries: Vec<&serde_json::Value> = v["bundles"].as_array().unwrap().iter().collect();
    entries.push(&v["total"]);
    entries.push(&v["twisted"]);
    for c in entries {
        assert_eq!(c["b0"], "0");
        assert_eq!(c["b1"], "0");
    }
}

#[test]
fn coeffs_are_rational_strings() {
    let cfg = config_dir().join("coeffs_cp1_rotation.json");
    let o = csck(&["coeffs", "--config", cfg.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["bundles"][0]["b0"], "-1/2");
    assert_eq!(v["twisted"]["a1"], "-1");
}

#[test]
fn unknown_field_is_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", r#"{"tuple": {"model": "CP1", "degrees": [1, 1]}, "colour": 1}"#);
    let o = csck(&["shat", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_json_is_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", "{ not json");
    assert_eq!(csck(&["shat", "--config", &cfg]).status.code(), Some(2));
    assert_eq!(csck(&["shat"]).status.code(), Some(2));
}

#[test]
fn out_of_scope_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    // metric routes are CP1 only
    let cfg = write_config(
        dir.path(),
        "prod.json",
        r#"{"tuple": {"model": "CP1xCP1", "bidegrees": [[1, 1], [1, 1]]}, "twist": {"t": 0.5}}"#,
    );
    assert_eq!(csck(&["twisted-futaki", "--config", &cfg]).status.code(), Some(3));
}

#[test]
fn twist_infeasible_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "b.json",
        r#"{"tuple": {"model": "CP1", "degrees": [1, 5]}, "bergman": {"ks": [3]}}"#,
    );
    assert_eq!(csck(&["bergman", "--config", &cfg]).status.code(), Some(3));
}

#[test]
fn reports_are_deterministic() {
    let cfg = config_dir().join("futaki_cp1_perturbed.json");
    let a = csck(&["futaki", "--config", cfg.to_str().unwrap(), "--quad-nodes", "1600"]);
    let b = csck(&["futaki", "--config", cfg.to_str().unwrap(), "--quad-nodes", "1600"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["routes_agree"], true);
    assert_eq!(v["quadrature"]["panels"], 200);
    assert!(v["scan"]["max_deviation"].as_f64().unwrap() < 1e-7);
}

#[test]
fn out_dir_receives_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_dir().join("shat_cp1_nonfano.json");
    let o = csck(&["shat", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("shat.json")).unwrap()).unwrap();
    assert_eq!(v["s_hat"], "-3/2");
}

#[test]
fn csv_only_for_grid_and_trace_dumps() {
    let cfg = config_dir().join("coeffs_cp1_rotation.json");
    let o = csck(&["coeffs", "--config", cfg.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(2));

    let cfg = config_dir().join("solve_cp1_perturbed.json");
    let o = csck(&["solve", "--config", cfg.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("iteration,residual"));
    assert!(text.lines().count() >= 3);
}

#[test]
fn solve_reports_converged_metric() {
    let cfg = config_dir().join("solve_cp1_perturbed.json");
    let o = csck(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["residual"].as_f64().unwrap() < 1e-10);
    assert_eq!(v["metric"]["degrees"], serde_json::json!(["1", "2"]));
}

#[test]
fn command_mismatch_is_rejected() {
    let cfg = config_dir().join("coeffs_cp1_trivial.json");
    assert_eq!(csck(&["shat", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn shipped_corpus_runs() {
    for entry in fs::read_dir(config_dir()).unwrap() {
        let path = entry.unwrap().path();
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        let cmd = v["command"].as_str().unwrap();
        let o = csck(&[cmd, "--config", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}: {}", path.display(), String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn verify_single_criterion() {
    let o = csck(&["verify", "--criterion", "1", "--criterion", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("[PASS]  1"));
    assert!(text.contains("2/2 criteria passed"));
    assert_eq!(csck(&["verify", "--criterion", "11"]).status.code(), Some(2));
}
