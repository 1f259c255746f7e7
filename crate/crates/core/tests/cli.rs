use std::process::{Command, Output};

fn qcm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcm"))
        .args(args)
        .output()
        .expect("run qcm")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn eval_json() {
    let o = qcm(&["eval", "(2+3)*4", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["exact"], 20.0);
    assert!((v["circuit"].as_f64().unwrap() - 20.0).abs() < 1e-9);
    assert!(v["rel_err"].as_f64().unwrap() <= 1e-9);
    assert_eq!(v["expr"], "((2 + 3) * 4)");
    for key in [
        "abs_err",
        "physical_gates",
        "clones",
        "renorms",
        "num_magnitude",
        "den_magnitude",
    ] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert!(v.get("estimate").is_none());
}

#[test]
fn eval_text() {
    let o = qcm(&["eval", "-(2+3)^2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("expression      (-((2 + 3) ^ 2))"));
    assert!(text.contains("exact           -25"));
}

#[test]
fn divisor_guard_exits_1() {
    let o = qcm(&["eval", "1/0.0000001"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("divisor"), "{err}");
}

#[test]
fn parse_error_exits_1() {
    let o = qcm(&["eval", "2^^3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("offset 2"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(qcm(&["eval", "1+1", "--bogus"]).status.code(), Some(2));
    assert_eq!(qcm(&["eval"]).status.code(), Some(2));
    assert_eq!(
        qcm(&["eval", "1", "--renorm", "maybe"]).status.code(),
        Some(2)
    );
    assert_eq!(
        qcm(&["estimate", "1", "--shots", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(qcm(&["selftest", "--only", "99"]).status.code(), Some(2));
}

#[test]
fn help_lists_every_flag() {
    let o = qcm(&["eval", "--help"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for flag in [
        "--mode",
        "--shots",
        "--seed",
        "--renorm",
        "--trace",
        "--json",
        "--den-floor",
        "--level",
        "--precision",
    ] {
        assert!(text.contains(flag), "{flag}");
    }
}

#[test]
fn estimate_is_reproducible() {
    let args = [
        "estimate", "2*3", "--shots", "1000000", "--seed", "7", "--json",
    ];
    let a = qcm(&args);
    let b = qcm(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    let est = &v["estimate"];
    assert_eq!(est["seed"], 7);
    assert_eq!(est["method"], "delta");
    assert!((est["point"].as_f64().unwrap() - 6.0).abs() < 0.5);
    let ci = est["ci"].as_array().unwrap();
    assert!(ci[0].as_f64().unwrap() < ci[1].as_f64().unwrap());
}

#[test]
fn missing_seed_is_generated_and_reported() {
    let o = qcm(&[
        "eval", "0.5", "--mode", "sampled", "--shots", "1000", "--json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let err = String::from_utf8_lossy(&o.stderr);
    let echoed: u64 = err.trim().strip_prefix("seed: ").unwrap().parse().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["estimate"]["seed"], echoed);
}

#[test]
fn trace_to_file_and_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.jsonl");
    let o = qcm(&["trace", "1+2", "--trace", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let file = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<serde_json::Value> = file
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(!lines.is_empty());
    for (k, ev) in lines.iter().enumerate() {
        assert_eq!(ev["step"], k as u64);
        for key in ["gate", "in", "out", "physical"] {
            assert!(ev.get(key).is_some(), "{key}");
        }
    }
    assert!(lines.iter().any(|ev| ev["gate"] == "MEAN"));

    let o = qcm(&["trace", "1+2"]);
    assert_eq!(stdout(&o), file);
}

#[test]
fn wide_precision_reaches_large_powers() {
    let narrow = qcm(&["eval", "1.1^1024"]);
    assert_eq!(narrow.status.code(), Some(1));
    let o = qcm(&[
        "eval",
        "1.1^1024",
        "--precision",
        "wide",
        "--den-floor",
        "1e-60",
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["rel_err"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn selftest_single_criterion() {
    let o = qcm(&["selftest", "--only", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("PASS [ 1]"));
}
