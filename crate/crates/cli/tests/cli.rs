use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_endomeasure"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("endomeasure-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

/// Dense `n x n` real matrix in the JSON layout.
fn matrix(n: usize, entries: &[(usize, usize, f64)]) -> Value {
    let mut data = vec![[0.0, 0.0]; n * n];
    for &(r, c, v) in entries {
        data[r * n + c][0] += v;
    }
    json!({"rows": n, "cols": n, "data": data})
}

fn write_instrument(name: &str, chois: Vec<Value>) -> PathBuf {
    let outcomes: Vec<Value> = chois
        .into_iter()
        .enumerate()
        .map(|(i, c)| json!({"label": format!("E{}", i + 1), "choi": c}))
        .collect();
    let path = scratch(name);
    std::fs::write(&path, serde_json::to_string(&json!({"dim": 2, "outcomes": outcomes})).unwrap()).unwrap();
    path
}

fn projective() -> PathBuf {
    write_instrument("projective.json", vec![matrix(4, &[(0, 0, 1.0)]), matrix(4, &[(3, 3, 1.0)])])
}

fn identity() -> PathBuf {
    write_instrument(
        "identity.json",
        vec![matrix(4, &[(0, 0, 1.0), (0, 3, 1.0), (3, 0, 1.0), (3, 3, 1.0)])],
    )
}

fn run(cmd: &mut Command) -> (i32, String, String) {
    let Output { status, stdout, stderr } = cmd.output().unwrap();
    (
        status.code().unwrap(),
        String::from_utf8(stdout).unwrap(),
        String::from_utf8(stderr).unwrap(),
    )
}

fn check<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["checks"].as_array().unwrap().iter().find(|c| c["name"] == name).unwrap()
}

#[test]
fn verify_accepts_valid_instruments() {
    for path in [projective(), identity()] {
        let (code, out, _) = run(bin().arg("verify").arg(&path));
        assert_eq!(code, 0, "{out}");
        let report: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(report["meta"]["seed"], 42);
    }
}

#[test]
fn verify_flags_negative_choi() {
    let path = write_instrument(
        "negative.json",
        vec![matrix(4, &[(0, 0, 1.1)]), matrix(4, &[(3, 3, 1.0), (0, 0, -0.1)])],
    );
    let (code, out, err) = run(bin().arg("verify").arg(&path));
    assert_eq!(code, 1);
    assert!(err.contains("CP"), "{err}");
    let report: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(check(&report, "CP")["pass"], false);
}

#[test]
fn verify_rejects_truncated_json() {
    let text = std::fs::read_to_string(projective()).unwrap();
    let path = scratch("truncated.json");
    std::fs::write(&path, &text[..text.len() / 2]).unwrap();
    let (code, _, err) = run(bin().arg("verify").arg(&path));
    assert_eq!(code, 2, "{err}");
    let (code, _, _) = run(bin().arg("verify").arg(scratch("missing.json")));
    assert_eq!(code, 2);
}

#[test]
fn demo_section2_weights_and_histogram() {
    let csv = scratch("hist.csv");
    let (code, out, _) = run(bin().args(["demo", "section2", "--state", "diag:0.3,0.7", "--csv"]).arg(&csv));
    assert_eq!(code, 0, "{out}");
    let report: Value = serde_json::from_str(&out).unwrap();
    let w = report["derived"]["weights"].as_array().unwrap();
    assert!((w[0].as_f64().unwrap() - 0.3).abs() < 1e-10);
    assert!((w[1].as_f64().unwrap() - 0.7).abs() < 1e-10);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("outcome_index,count,exact_probability"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "1");
    let count: f64 = first[1].parse().unwrap();
    assert!((count - 30_000.0).abs() < 4.0 * (1e5f64 * 0.21).sqrt());
}

#[test]
fn demo_reports_are_byte_identical() {
    let a = scratch("a.json");
    let b = scratch("b.json");
    for path in [&a, &b] {
        let (code, _, _) = run(bin().args(["demo", "section2", "--seed", "7", "--shots", "5000", "--out"]).arg(path));
        assert_eq!(code, 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn demo_config_file_feeds_the_scenario() {
    let cfg = scratch("config.json");
    std::fs::write(&cfg, r#"{"k": 3, "levels": 2, "flavor": "generic", "d": 3, "shots": 2000, "seed": 5}"#).unwrap();
    let (code, out, _) = run(bin().args(["demo", "section2", "--config"]).arg(&cfg));
    assert_eq!(code, 0, "{out}");
    let report: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["derived"]["weights"].as_array().unwrap().len(), 3);
    assert_eq!(report["meta"]["seed"], 5);
}

#[test]
fn demo_identity_interaction_gains_nothing() {
    let (code, out, _) = run(bin().args(["demo", "section2", "--identity-U", "--state", "diag:0.3,0.7"]));
    assert_eq!(code, 0, "{out}");
    let report: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(check(&report, "povm_trivial")["pass"], true);
    assert_eq!(report["derived"]["no_information_gained"], true);
}

#[test]
fn demo_chi_fidelity_vanishes() {
    let (code, out, _) = run(bin().args(["demo", "chi", "--k", "3", "--levels", "2"]));
    assert_eq!(code, 0, "{out}");
    let report: Value = serde_json::from_str(&out).unwrap();
    for f in report["derived"]["per_factor_fidelity"].as_array().unwrap() {
        assert!(f.as_f64().unwrap() < 1e-12);
    }
}

#[test]
fn demo_tensor_power_and_cap() {
    let (code, out, _) = run(bin().args(["demo", "tensor-power", "--k", "2", "--levels", "2", "--copies", "2"]));
    assert_eq!(code, 0, "{out}");
    let (code, _, err) = run(bin().args(["demo", "tensor-power", "--k", "3", "--levels", "4", "--copies", "3"]));
    assert_eq!(code, 2);
    assert!(err.contains("cap"), "{err}");
}

#[test]
fn dilate_round_trips() {
    for path in [projective(), identity()] {
        let out = scratch("dilation.json");
        let (code, _, err) = run(bin().arg("dilate").arg(&path).arg("--out").arg(&out));
        assert_eq!(code, 0, "{err}");
        let dil: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
        assert!(dil["unitary"]["rows"].as_u64().unwrap() >= 2);
    }
}

#[test]
fn dilate_rejects_non_psd_choi() {
    let path = write_instrument(
        "near_psd.json",
        vec![
            matrix(4, &[(0, 0, 1.0), (1, 1, -1e-6)]),
            matrix(4, &[(3, 3, 1.0), (1, 1, 1e-6)]),
        ],
    );
    let (code, _, err) = run(bin().arg("dilate").arg(&path));
    assert_eq!(code, 2);
    assert!(err.contains("1e-10"), "{err}");
}

#[test]
fn sample_writes_histogram() {
    let csv = scratch("sample.csv");
    let (code, out, _) = run(bin().arg("sample").arg(projective()).args(["--state", "diag:0.25,0.75", "--shots", "4000", "--csv"]).arg(&csv));
    assert_eq!(code, 0);
    let summary: Value = serde_json::from_str(&out).unwrap();
    let counts = summary["histogram"]["counts"].as_array().unwrap();
    assert_eq!(counts.iter().map(|c| c.as_u64().unwrap()).sum::<u64>(), 4000);
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("outcome_index,"));
    let (code, _, _) = run(bin().arg("sample").arg(projective()).args(["--state", "diag:1,0,0"]));
    assert_eq!(code, 2);
}
