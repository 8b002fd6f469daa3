use std::path::Path;
use std::process::{Command, Output};

fn illposed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_illposed"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn elliptic_defaults_print_csv() {
    let out = illposed(&["elliptic", "--steps", "1000"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,rel_error,successive_diff,residual");
    assert!(lines[1].starts_with("100,4.73796e-1,"));
    assert!(lines[2].starts_with("1000,5.70054e-4,"));
    assert_eq!(lines.len(), 3);
}

#[test]
fn seeded_runs_are_byte_identical() {
    let args = ["parabolic", "--modes", "12", "--eps", "1e-3", "--seed", "9", "--format", "json"];
    let a = illposed(&args);
    let b = illposed(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let c = illposed(&["parabolic", "--modes", "12", "--eps", "1e-3", "--seed", "10", "--format", "json"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t2.md");
    let out = illposed(&["table2", "--format", "markdown", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let md = std::fs::read_to_string(&path).unwrap();
    assert!(md.contains("| 1 | 47.3796% |"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{
            "problem": {"kind": "elliptic", "horizon": 1.0, "f": {"type": "zero"}, "g": {"type": "unit_mode", "k": 2}},
            "spectrum": {"basis": "sine1d", "n_modes": 2, "length": 1.0},
            "schedule": {"checkpoints": [10, 100]},
            "output": {"format": "json"}
        }"#,
    );
    let out = illposed(&["elliptic", "--config", &cfg]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8(out.stdout).unwrap().contains("\"problem\": \"elliptic\""));
    let out = illposed(&["elliptic", "--config", &cfg, "--format", "csv"]);
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("k,rel_error"));
    // config kind must match the subcommand
    assert_eq!(code(&illposed(&["hyperbolic", "--config", &cfg])), 2);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // config errors
    assert_eq!(code(&illposed(&["elliptic", "--gamma", "2"])), 2);
    assert_eq!(code(&illposed(&["table2", "--eps", "0.1"])), 2);
    let bad = write(dir.path(), "bad.json", "{ not json");
    assert_eq!(code(&illposed(&["elliptic", "--config", &bad])), 2);
    assert_eq!(code(&illposed(&["elliptic", "--config", "/no/such/config.json"])), 4);
    // resonance: T = 1 hits sin(k pi) = 0
    let res = write(
        dir.path(),
        "res.json",
        r#"{
            "problem": {"kind": "hyperbolic", "horizon": 1.0, "f": {"type": "zero"}, "g": {"type": "unit_mode", "k": 1}},
            "spectrum": {"basis": "sine1d", "n_modes": 4, "length": 1.0},
            "schedule": {"checkpoints": [10]}
        }"#,
    );
    let out = illposed(&["hyperbolic", "--config", &res]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("illposed: numeric error:"));
    // unwritable output
    assert_eq!(code(&illposed(&["table2", "--out", "/no/such/dir/t.csv"])), 4);
}

#[test]
fn grid_data_source() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("x,value\n");
    for i in 0..=128 {
        let x = i as f64 / 128.0;
        csv.push_str(&format!("{x},{}\n", (2.0f64).sqrt() * (std::f64::consts::PI * x).sin()));
    }
    write(dir.path(), "g.csv", &csv);
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{
            "problem": {"kind": "elliptic", "horizon": 1.0, "f": {"type": "zero"}, "g": {"type": "grid", "path": "g.csv"}},
            "spectrum": {"basis": "sine1d", "n_modes": 3, "length": 1.0},
            "schedule": {"checkpoints": [100]}
        }"#,
    );
    let out = illposed(&["elliptic", "--config", &cfg]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8(out.stdout).unwrap().contains("100,4.7"));
}

#[test]
fn demo_reports_overflow() {
    let out = illposed(&["demo-illposed", "--kind", "elliptic", "--modes", "400"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("k,lambda,data_norm,solution_norm,overflow\n"));
    assert!(text.lines().nth(1).unwrap().ends_with("false"));
    assert!(text.lines().last().unwrap().ends_with("true"));
}
