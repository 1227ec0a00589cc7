use std::fs;
use std::path::Path;
use std::process::Command;

use kelab::{run_all, run_suite, RunError, SuiteConfig, SUITES};
use kelab_core::DomainModel;
use serde_json::Value;

fn kelab() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_kelab"));
    c.env_remove("KELAB_SEED");
    c
}

fn without_runtime(json: &str) -> Value {
    let mut v: Value = serde_json::from_str(json).unwrap();
    v.as_object_mut().unwrap().remove("runtime_ms");
    v
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn constant_length_on_the_ball() {
    let cfg = SuiteConfig {
        domain: Some(DomainModel::ball(2).unwrap()),
        ricci: Some(3.0),
        samples: Some(200),
        ..Default::default()
    };
    let r = run_suite("constant-length", &cfg).unwrap();
    assert!(r.max_residual <= 1e-8);
    assert!(r.pass);
    assert_eq!(r.samples.len(), 200);
}

#[test]
fn config_keys_follow_the_documented_names() {
    let cfg: SuiteConfig =
        serde_json::from_str(r#"{"domain": {"kind": "ball", "params": {"n": 2}}, "K": 3, "samples": 10}"#).unwrap();
    assert_eq!(cfg.ricci, Some(3.0));
    assert!(run_suite("constant-length", &cfg).unwrap().pass);
}

#[test]
fn table_and_minimality_pass() {
    for name in ["table1", "ball-minimality"] {
        let r = run_suite(name, &SuiteConfig::default()).unwrap();
        assert!(r.pass, "{name}");
        assert!(r.domain.is_none());
    }
}

#[test]
fn cheng_yau_reaches_the_boundary_limit() {
    let cfg = SuiteConfig { n: Some(2), ricci: Some(3.0), ..Default::default() };
    let r = run_suite("cheng-yau", &cfg).unwrap();
    assert!(r.pass);
    let limit = r.params["boundary_limit"].as_f64().unwrap();
    assert!((limit - 1.0).abs() <= 0.02);
    assert!(r.side_files.iter().any(|f| f.suffix == "radial.csv" && f.contents.starts_with("t,phi,dphi,gradient_length\n")));
}

#[test]
fn reports_are_deterministic_apart_from_runtime() {
    for name in ["einstein", "flow", "kai-ohsawa"] {
        let cfg = SuiteConfig { samples: Some(3), seed: Some(42), ..Default::default() };
        let a = run_suite(name, &cfg).unwrap().to_json();
        let b = run_suite(name, &cfg).unwrap().to_json();
        assert_eq!(without_runtime(&a), without_runtime(&b), "{name}");
    }
}

#[test]
fn report_has_the_documented_fields() {
    let r = run_suite("key-equation", &SuiteConfig { samples: Some(2), ..Default::default() }).unwrap();
    let v: Value = serde_json::from_str(&r.to_json()).unwrap();
    let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort();
    assert_eq!(keys, ["domain", "max_residual", "params", "pass", "runtime_ms", "samples", "suite"]);
    let sample = &v["samples"][0];
    assert_eq!(sample["point"].as_array().unwrap().len(), 2);
    assert!(sample["residuals"]["key_equation"].is_f64());
    assert_eq!(v["domain"]["kind"], "ball");
}

#[test]
fn bad_inputs_are_configuration_errors() {
    let err = run_suite("nope", &SuiteConfig::default()).unwrap_err();
    assert!(matches!(err, RunError::UnknownSuite(_)));
    assert_eq!(err.exit_code(), 2);
    let err = run_suite("einstein", &SuiteConfig { tol: Some(0.0), ..Default::default() }).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    let cfg = SuiteConfig { domain: Some(DomainModel::type_i(2, 2).unwrap()), ..Default::default() };
    assert_eq!(run_suite("constant-length", &cfg).unwrap_err().exit_code(), 2);
}

#[test]
fn tight_tolerance_fails_verification() {
    let cfg = SuiteConfig { samples: Some(3), tol: Some(1e-30), ..Default::default() };
    let r = run_suite("einstein", &cfg).unwrap();
    assert!(!r.pass);
}

#[test]
fn run_all_writes_every_report_and_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "kelab.toml", "out_dir = \"out\"\nsamples = 3\n[suites.constant-length]\nsamples = 20\n");
    let outcome = run_all(&cfg, Some(2), None).unwrap();
    assert!(outcome.pass);
    assert_eq!(outcome.exit_code, 0);
    for s in &SUITES {
        assert!(dir.path().join("out").join(format!("{}.json", s.name)).exists(), "{}", s.name);
    }
    let summary: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["suites"].as_array().unwrap().len(), SUITES.len());
    assert!(summary["suites"][0]["statement"].is_string());
    assert!(dir.path().join("out/cheng-yau.radial.csv").exists());
    assert!(dir.path().join("out/flow.trajectory-0.csv").exists());
}

#[test]
fn run_all_rejects_bad_configs() {
    let dir = tempfile::tempdir().unwrap();
    let zero = write(dir.path(), "zero.toml", "tol = 0.0\n");
    assert_eq!(run_all(&zero, None, None).unwrap_err().exit_code(), 2);
    let unknown = write(dir.path(), "unknown.toml", "[suites.bogus]\nsamples = 2\n");
    assert_eq!(run_all(&unknown, None, None).unwrap_err().exit_code(), 2);
    assert_eq!(run_all(&dir.path().join("missing.toml"), None, None).unwrap_err().exit_code(), 2);
}

#[test]
fn binary_list_and_exit_codes() {
    let out = kelab().arg("list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for s in &SUITES {
        assert!(text.contains(s.name));
    }
    assert_eq!(kelab().args(["run", "table1", "--bogus"]).status().unwrap().code(), Some(2));
    assert_eq!(kelab().args(["run", "nope"]).status().unwrap().code(), Some(2));
    assert_eq!(kelab().args(["run", "einstein", "--domain", "type1", "--p", "2"]).status().unwrap().code(), Some(2));
    assert_eq!(kelab().args(["run", "einstein", "--tol", "0"]).status().unwrap().code(), Some(2));
    assert_eq!(kelab().args(["run-all", "--config", "/nonexistent/kelab.toml"]).status().unwrap().code(), Some(2));
    let fail = kelab().args(["run", "einstein", "--samples", "2", "--tol", "1e-30"]).output().unwrap();
    assert_eq!(fail.status.code(), Some(1));
}

#[test]
fn binary_writes_reports_and_honours_kelab_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let status = kelab()
        .args(["run", "flow", "--domain", "ball", "--n", "2", "--samples", "2", "--out"])
        .arg(&out)
        .env("KELAB_SEED", "17")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["params"]["seed"], 17);
    assert!(dir.path().join("r.trajectory-1.csv").exists());

    let stdout = kelab()
        .args(["run", "einstein", "--domain", "type1", "--p", "2", "--q", "2", "--samples", "2"])
        .env("KELAB_SEED", "5")
        .output()
        .unwrap();
    assert!(stdout.status.success());
    let v: Value = serde_json::from_str(&String::from_utf8(stdout.stdout).unwrap()).unwrap();
    assert_eq!(v["params"]["seed"], 5);
    assert_eq!(v["domain"]["kind"], "type1");
    assert_eq!(v["params"]["K"], 1.0);
}
