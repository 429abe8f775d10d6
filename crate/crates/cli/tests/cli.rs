//! End-to-end command tests: exit codes, artifacts, and report contents.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const TAU: f64 = std::f64::consts::TAU;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lichnerowicz"))
}

fn write_config(dir: &Path, body: &Value) -> std::path::PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(body).unwrap()).unwrap();
    path
}

fn benchmark_config(out: &Path) -> Value {
    serde_json::json!({
        "grid": {"d": 1, "n": [64], "L": [TAU]},
        "coefficients": {
            "mode": "direct", "N": 3,
            "a": "1", "b": "2", "csq": "0", "dsq": "1", "cd": "0", "h": "0"
        },
        "output": {"directory": out.to_str().unwrap()}
    })
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_benchmark_exits_zero_with_small_residual() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(tmp.path(), &benchmark_config(&out));
    let result = run(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(0), "{result:?}");
    let rep = report(&out.join("solve_report.json"));
    assert_eq!(rep["report"]["solve"]["converged"], Value::Bool(true));
    let res = rep["report"]["solve"]["final_res_inf"].as_f64().unwrap();
    assert!(res < 1e-8, "residual {res}");
    // trace CSV has the documented header and a matching final row
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(
        lines.next().unwrap(),
        "iter,delta_inf,res_inf,res_l2,u_min,u_max"
    );
    let last = trace.lines().last().unwrap();
    let cols: Vec<&str> = last.split(',').collect();
    assert_eq!(cols.len(), 6);
    assert!(cols[2].parse::<f64>().unwrap() < 1e-8);
    // the field pair was written
    assert!(out.join("u.f64").exists() && out.join("u.json").exists());
}

#[test]
fn check_zero_a_exits_two_citing_a2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let mut cfg_doc = benchmark_config(&out);
    cfg_doc["coefficients"]["a"] = Value::String("0".into());
    cfg_doc["coefficients"]["h"] = Value::String("1".into());
    let cfg = write_config(tmp.path(), &cfg_doc);
    let result = run(&["check", "--config", cfg.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(2), "{result:?}");
    let rep = report(&out.join("check_report.json"));
    let a2 = &rep["report"]["assumptions"]["a2_essinf_a_positive"];
    assert_eq!(a2["pass"], Value::Bool(false));
}

#[test]
fn nonexist_example_certifies() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let mut cfg_doc = benchmark_config(&out);
    cfg_doc["coefficients"]["b"] = Value::String("0".into());
    cfg_doc["coefficients"]["h"] = Value::String("1".into());
    let cfg = write_config(tmp.path(), &cfg_doc);
    let result = run(&["nonexist", "--config", cfg.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(0), "{result:?}");
    let rep = report(&out.join("nonexist_report.json"));
    assert_eq!(rep["report"]["ne1"]["satisfied"], Value::Bool(true));
    assert_eq!(rep["report"]["oracle_certified"], Value::Bool(true));
    assert_eq!(rep["report"]["consistency"], Value::Bool(true));
}

#[test]
fn configuration_errors_exit_four() {
    let tmp = tempfile::tempdir().unwrap();
    // missing config file
    let result = run(&["check", "--config", "/nonexistent/config.json"]);
    assert_eq!(result.status.code(), Some(4));
    // invalid JSON
    let bad = tmp.path().join("bad.json");
    fs::write(&bad, "{not json").unwrap();
    let result = run(&["check", "--config", bad.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(4));
    // unknown command
    let out = tmp.path().join("out");
    let cfg = write_config(tmp.path(), &benchmark_config(&out));
    let result = run(&["frobnicate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(4));
    // malformed expression
    let mut doc = benchmark_config(&out);
    doc["coefficients"]["h"] = Value::String("1+".into());
    let cfg = write_config(tmp.path(), &doc);
    let result = run(&["check", "--config", cfg.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(4));
}

#[test]
fn overrides_change_behavior() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(tmp.path(), &benchmark_config(&out));
    // setting a to zero through an override flips check to failure
    let result = run(&[
        "check",
        "--config",
        cfg.to_str().unwrap(),
        "--set",
        "coefficients.a=0",
        "--set",
        "coefficients.h=1",
    ]);
    assert_eq!(result.status.code(), Some(2), "{result:?}");
}

#[test]
fn manufacture_writes_reference_and_coefficients() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg_doc = serde_json::json!({
        "grid": {"d": 1, "n": [64], "L": [TAU]},
        "coefficients": {
            "mode": "manufactured", "N": 3,
            "u_star": "1.5 + 0.5*sin(x1)",
            "a": "1", "b": "2", "csq": "0", "dsq": "1", "cd": "0"
        },
        "output": {"directory": out.to_str().unwrap()}
    });
    let cfg = write_config(tmp.path(), &cfg_doc);
    let result = run(&["manufacture", "--config", cfg.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(0), "{result:?}");
    let rep = report(&out.join("manufacture_report.json"));
    assert!(rep["report"]["residual_inf"].as_f64().unwrap() < 1e-9);
    assert!(out.join("u_star.f64").exists());
    for name in ["a", "b", "csq", "dsq", "cd", "h", "meta"] {
        assert!(out.join("coefficients").join(format!("{name}.json")).exists());
    }
    // the manufactured coefficient directory can be fed back through `check`
    let coeff = out.join("coefficients");
    let check_doc = serde_json::json!({
        "grid": {"d": 1, "n": [64], "L": [TAU]},
        "coefficients": {
            "mode": "direct", "N": 3,
            "a": {"file": coeff.join("a").to_str().unwrap()},
            "b": {"file": coeff.join("b").to_str().unwrap()},
            "csq": {"file": coeff.join("csq").to_str().unwrap()},
            "dsq": {"file": coeff.join("dsq").to_str().unwrap()},
            "cd": {"file": coeff.join("cd").to_str().unwrap()},
            "h": {"file": coeff.join("h").to_str().unwrap()}
        },
        "output": {"directory": out.to_str().unwrap()}
    });
    let cfg2 = write_config(&tmp.path().join("."), &check_doc);
    let result = run(&["check", "--config", cfg2.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(0), "{result:?}");
}

#[test]
fn assemble_geometric_mode() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg_doc = serde_json::json!({
        "grid": {"d": 3, "n": [8, 8, 8], "L": [TAU, TAU, TAU]},
        "coefficients": {
            "mode": "geometric", "N": 3,
            "tau": "1 + 0.25*sin(x3)",
            "pi": "1.5",
            "nu": -0.25,
            "w": ["sin(x2)", "0", "cos(x1)"],
            "sigma": ["0", "0", "0", "0", "0", "0"]
        },
        "output": {"directory": out.to_str().unwrap()}
    });
    let cfg = write_config(tmp.path(), &cfg_doc);
    let result = run(&["assemble", "--config", cfg.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(0), "{result:?}");
    assert!(out.join("coefficients").join("a.f64").exists());
    // assembling from a direct-mode config is a configuration error
    let cfg2 = write_config(tmp.path(), &benchmark_config(&out));
    let result = run(&["assemble", "--config", cfg2.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(4));
}
