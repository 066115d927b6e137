use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use syncnet::config::parse_config;

const COUNTEREXAMPLE: &str = r#"{
  "system": {
    "field": {"name": "linear", "A": [[-0.1, 0.0], [0.0, -0.1]]},
    "W": [[0, 2, 1], [0, 0, 2], [1, 0, 0]],
    "coupling": {"kind": "linear", "Gamma": [[2, 1], [-17, 0]]},
    "alpha": 1.0
  }
}"#;

const PAIR: &str = r#"{
  "system": {
    "field": {"name": "nonautonomous_linear"},
    "W": [[0, 1], [1, 0]],
    "coupling": {"kind": "linear", "Gamma": [[1, 0], [0, 1]]},
    "alpha": 10.0
  },
  "run": {"t_end": 2.0, "base_state": [0, 0], "divergence_guard": 1e12}
}"#;

const PAIR_SWEEP: &str = r#"{
  "system": {
    "field": {"name": "nonautonomous_linear"},
    "W": [[0, 1], [1, 0]],
    "coupling": {"kind": "linear"}
  },
  "run": {"t_end": 6.0, "base_state": [0, 0], "divergence_guard": 1e12, "sync_tol": 1e-3},
  "sweep": {"beta_grid": [0.3, 0.4, 0.5], "family": "jordan", "tol": 0.05}
}"#;

fn syncnet(cmd: &str, config: &str, dir: &Path, extra: &[&str], envs: &[(&str, &str)]) -> Output {
    let path = dir.join("config.json");
    fs::write(&path, config).unwrap();
    let mut c = Command::new(env!("CARGO_BIN_EXE_syncnet"));
    c.arg(cmd).arg("--config").arg(&path).arg("--out").arg(dir.join("out")).arg("--quiet");
    c.args(extra);
    for (k, v) in envs {
        c.env(k, v);
    }
    c.output().unwrap()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out/report.json")).unwrap()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn analyze_reports_the_negative_gamma() {
    let tmp = tempfile::tempdir().unwrap();
    let o = syncnet("analyze", COUNTEREXAMPLE, tmp.path(), &[], &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(tmp.path());
    let gamma = r["results"]["gamma"].as_f64().unwrap();
    assert!((gamma + 1.0).abs() < 1e-9);
    assert_eq!(r["results"]["a3_satisfied"], Value::Bool(false));
    assert!(r["results"]["alpha_threshold"].is_null());
    for key in ["rho_bound", "rate_at_alpha", "C_estimate"] {
        assert!(r["results"][key].is_f64(), "{key}");
    }
}

#[test]
fn echoed_config_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&syncnet("simulate", PAIR, tmp.path(), &["--seed", "5"], &[])), 0);
    let r = report(tmp.path());
    let echo = r["config"].to_string();
    let parsed = parse_config(&echo, None).unwrap();
    assert_eq!(parse_config(&serde_json::to_string(&parsed).unwrap(), None).unwrap(), parsed);
    assert_eq!(r["config"]["run"]["seed"], 5);
    assert_eq!(r["config"]["run"]["dt"].as_f64(), Some(1e-3));
}

#[test]
fn rectangular_weights_exit_with_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = COUNTEREXAMPLE.replace("[[0, 2, 1], [0, 0, 2], [1, 0, 0]]", "[[0, 1], [1, 0], [1, 1]]");
    let o = syncnet("analyze", &bad, tmp.path(), &[], &[]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("/system/W"));
}

#[test]
fn single_node_simulation_is_the_isolated_system() {
    let tmp = tempfile::tempdir().unwrap();
    let one = PAIR.replace("[[0, 1], [1, 0]]", "[[0]]").replace("[0, 0]", "[5, 5]").replace("1e12", "1e6");
    let o = syncnet("simulate", &one, tmp.path(), &[], &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(tmp.path().join("out/trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,x_1_1,x_1_2"));
    let last: Vec<f64> = csv.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(last[0], 2.0);
    // Scatter of radius 1e-3 around (5, 5), then the exact flow.
    let exact = syncnet::core::dynamics::NonautonomousLinear.solution_from([5.0, 5.0], 2.0);
    let norm = exact[0].hypot(exact[1]);
    assert!(((last[1] - exact[0]).hypot(last[2] - exact[1])) < 2e-3 * norm);
}

#[test]
fn identical_seeds_give_identical_bytes() {
    let run = |seed: &str, form: &str| {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = PAIR.replace("\"run\"", &format!("\"output\": {{\"csv_form\": \"{form}\"}}, \"run\""));
        assert_eq!(code(&syncnet("simulate", &cfg, tmp.path(), &["--seed", seed], &[])), 0);
        let read = |f: &str| fs::read(tmp.path().join("out").join(f)).unwrap();
        (read("trajectory.csv"), read("spread.csv"))
    };
    for form in ["wide", "long"] {
        assert_eq!(run("11", form), run("11", form));
        assert_ne!(run("11", form).0, run("12", form).0);
    }
}

#[test]
fn sweep_writes_one_row_per_beta_independent_of_threads() {
    let run = |threads: &str| {
        let tmp = tempfile::tempdir().unwrap();
        let o = syncnet("sweep", PAIR_SWEEP, tmp.path(), &[], &[("SYNCNET_THREADS", threads)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        (fs::read_to_string(tmp.path().join("out/sweep.csv")).unwrap(), report(tmp.path()))
    };
    let (csv, r) = run("1");
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "beta,alpha_c,rho_c,bisection_width,evaluations");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("0.3,"));
    assert!(r["results"]["loglog_slope"].is_f64());
    assert_eq!(r["results"]["rows"].as_array().unwrap().len(), 3);
    assert_eq!(run("3").0, csv);
}

#[test]
fn divergence_is_a_runtime_error_with_a_report() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = COUNTEREXAMPLE.replace("\"alpha\": 1.0\n  }", "\"alpha\": 1.0\n  },\n  \"run\": {\"t_end\": 50.0}");
    let o = syncnet("simulate", &cfg, tmp.path(), &[], &[]);
    assert_eq!(code(&o), 2);
    let r = report(tmp.path());
    assert_eq!(r["status"], "runtime_error");
    assert_eq!(r["results"]["diverged"]["kind"], "guard");
}

#[test]
fn missing_threshold_is_a_runtime_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = COUNTEREXAMPLE.replace(
        "\"alpha\": 1.0\n  }",
        "\"alpha\": 1.0\n  },\n  \"run\": {\"t_end\": 20.0},\n  \"critical\": {\"max_doublings\": 3}",
    );
    let o = syncnet("critical", &cfg, tmp.path(), &[], &[]);
    assert_eq!(code(&o), 2);
    assert!(report(tmp.path())["error"].as_str().unwrap().contains("no synchronising coupling"));
}

#[test]
fn critical_coupling_of_the_rotating_pair() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = PAIR.replace("\"t_end\": 2.0", "\"t_end\": 6.0, \"sync_tol\": 1e-3");
    let cfg = cfg.replace("\"run\"", "\"critical\": {\"bracket\": {\"lo\": 0, \"hi\": 4}, \"tol\": 0.01}, \"run\"");
    let o = syncnet("critical", &cfg, tmp.path(), &[], &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(tmp.path());
    // Two nodes with Γ = I: the difference obeys A(t) − 2α, unstable below α = 1.
    let alpha_c = r["results"]["critical"]["alpha_c"].as_f64().unwrap();
    assert!(alpha_c > 1.0 && alpha_c < 2.0, "{alpha_c}");
    assert!((r["results"]["gamma"].as_f64().unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn persistence_reports_the_tail_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = PAIR.replace("\"alpha\": 10.0", "\"alpha\": 10.0, \"perturbation\": {\"eps0\": 0.01, \"seed\": 3}");
    let cfg = cfg.replace("\"t_end\": 2.0", "\"t_end\": 4.0").replace("\"run\"", "\"analysis\": {\"varrho\": 13}, \"run\"");
    let o = syncnet("persistence", &cfg, tmp.path(), &[], &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(tmp.path());
    let limsup = r["results"]["limsup_estimate"].as_f64().unwrap();
    assert!(limsup > 0.0);
    assert!(r["results"]["ratio"].as_f64().unwrap() <= 1.0);
    let csv = fs::read_to_string(tmp.path().join("out/persistence.csv")).unwrap();
    assert!(csv.starts_with("t,e_s\r\n"));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "").unwrap();
    let path = tmp.path().join("config.json");
    fs::write(&path, COUNTEREXAMPLE).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_syncnet"))
        .args(["analyze", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(blocker.join("sub"))
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
}
