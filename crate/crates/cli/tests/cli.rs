use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toda-tau")).args(args).output().expect("binary runs")
}

fn records(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout).lines().map(|l| serde_json::from_str(l).expect("json line")).collect()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn trivial_tau_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let sigma = write(dir.path(), "sigma.json", "");
    let out = run(&["tau", "--t", "0", "--t-prime", "0", "--sigma-file", &sigma]);
    assert_eq!(code(&out), 0);
    let r = &records(&out)[0];
    assert_eq!(r["value"][0].as_f64(), Some(1.0));
    assert_eq!(r["value"][1].as_f64(), Some(0.0));
    assert!(r["bound"].is_number());
}

#[test]
fn gap_agrees_with_bruteforce() {
    let gap = run(&["gap", "--n", "2"]);
    let brute = run(&["bruteforce", "--kind", "gap", "--n", "2"]);
    assert_eq!((code(&gap), code(&brute)), (0, 0));
    let a = records(&gap)[0]["value"].as_f64().unwrap();
    let b = records(&brute)[0]["value"].as_f64().unwrap();
    assert!((a - b).abs() <= 1e-6, "{a} vs {b}");
}

#[test]
fn flags_override_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", r#"{"command": "tau", "t": [0.3], "t_prime": [0.3], "n": 0, "n_to": 1}"#);
    let from_file = records(&run(&["tau", "--config", &cfg]));
    assert_eq!(from_file.len(), 2);
    assert_eq!(from_file[0]["params"]["t"]["params"]["1"][0].as_f64(), Some(0.3));
    let overridden = records(&run(&["tau", "--config", &cfg, "--t", "0.1"]));
    assert_eq!(overridden[0]["params"]["t"]["params"]["1"][0].as_f64(), Some(0.1));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let wrong = write(dir.path(), "wrong.json", r#"{"command": "gap"}"#);
    assert_eq!(code(&run(&["tau", "--config", &wrong])), 2);
    let unknown = write(dir.path(), "unknown.json", r#"{"dimension": 3}"#);
    assert_eq!(code(&run(&["tau", "--config", &unknown])), 2);
    assert_eq!(code(&run(&["tau", "--dim", "100000"])), 2);
    assert_eq!(code(&run(&["no-such-command"])), 2);
    let paper = r#"{"kind": "paper_form", "u": 0.3}"#;
    assert_eq!(code(&run(&["tau", "--sigma", paper])), 2);
    assert_eq!(code(&run(&["tau", "--sigma", paper, "--allow-nonstandard-sigma"])), 0);
}

#[test]
fn numerical_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "h.json",
        r#"{"grid": "single", "radius": 0.6, "samples": 16, "max_samples": 16, "tol": 1e-15, "t": [2.0], "t_prime": [2.0]}"#,
    );
    assert_eq!(code(&run(&["hirota", "--config", &cfg])), 3);
}

#[test]
fn output_is_deterministic_and_csv_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("tau.csv");
    let args = [
        "tau",
        "--sigma",
        r#"{"kind": "fermi", "u": 0.3}"#,
        "--n",
        "-1",
        "--n-to",
        "1",
        "--csv",
        csv.to_str().unwrap(),
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let body = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(body.lines().count(), 4);
    assert!(body.starts_with("n,value_re,value_im,bound"));
}

#[test]
fn hirota_default_grid_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("hirota.jsonl");
    let out = run(&["hirota", "--output", out_path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&out_path).unwrap();
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 28);
    let summary = lines.last().unwrap();
    assert_eq!(summary["command"], "hirota-summary");
    assert!(summary["max_residual"].as_f64().unwrap() <= 1e-6);
    assert!(lines[..27].iter().all(|r| r["bound"].is_number() && r["lhs"].is_array()));
}

#[test]
fn sigma_adjudication_emits_a_verdict() {
    let small = run(&["adjudicate", "--adjudicate", "sigma"]);
    assert_eq!(code(&small), 4);
    assert!(records(&small)[0]["matching"].is_null());

    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.json", r#"{"adjudicate": "sigma", "sigma_max_size": 12}"#);
    let large = run(&["adjudicate", "--config", &cfg]);
    assert_eq!(code(&large), 0);
    assert_eq!(records(&large)[0]["matching"], "fermi");
}

#[test]
fn charge_sign_adjudication_names_the_sign() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "l.json", r#"{"adjudicate": "charge_sign", "sigma_count": 3, "charges": [-1, 1]}"#);
    let out = run(&["adjudicate", "--config", &cfg]);
    assert_eq!(code(&out), 0);
    let r = &records(&out)[0];
    assert_eq!(r["sign"], "minus_n");
    assert_eq!(r["kind"], "charge_sign");
}

/// At `e_max = 10` only the vertex identity feels the energy truncation.
#[test]
fn fock_check_flags_truncated_vertex_audit() {
    let out = run(&["fock-check", "--e-max", "10"]);
    assert_eq!(code(&out), 4);
    let recs = records(&out);
    assert!(recs.iter().any(|r| r["name"] == "boson_fermion"));
    for r in &recs {
        let expected = r["name"] != "vertex_commutation";
        assert_eq!(r["pass"], expected, "{r}");
    }
}
