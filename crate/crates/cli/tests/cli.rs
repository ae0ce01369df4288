use std::process::{Command, Output};

fn bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rcd-bench"))
        .args(args)
        .env_remove("MANIFOLD_CD_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const SMALL: &[&str] = &["run", "--problem", "procrustes", "--n", "6", "--p", "3", "--epochs", "5", "--seed", "3"];

#[test]
fn run_writes_a_csv_trace() {
    let o = bench(SMALL);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,s,f,grad_norm,feasibility,flops,wall_ns"));
    // One initial record plus 15 inner steps in each of 5 epochs.
    assert_eq!(lines.count(), 1 + 5 * 15);
    let summary = String::from_utf8_lossy(&o.stderr);
    assert!(summary.contains("relative gap"), "{summary}");
}

#[test]
fn runs_are_byte_identical() {
    let a = bench(SMALL);
    let b = bench(SMALL);
    assert_eq!(a.stdout, b.stdout);
    let mut other: Vec<&str> = SMALL.to_vec();
    *other.last_mut().unwrap() = "4";
    assert_ne!(bench(&other).stdout, a.stdout);
}

#[test]
fn out_flag_writes_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    let mut args = SMALL.to_vec();
    let p = path.to_str().unwrap();
    args.extend(["--out", p]);
    let o = bench(&args);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), bench(SMALL).stdout);
}

#[test]
fn usage_errors_exit_with_two() {
    let cases: &[&[&str]] = &[
        &["run"],
        &["run", "--problem", "nope"],
        &["run", "--problem", "procrustes", "--eta", "-1"],
        &["run", "--problem", "lorentz-embed", "--algo", "tsd"],
        &["run", "--problem", "pca", "--n", "2", "--p", "3"],
        &["run", "--problem", "pca", "--select", "time-cyclic"],
        &["preset", "no-such-preset"],
        &["frobnicate"],
    ];
    for args in cases {
        let o = bench(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_rcd-bench"))
        .args(["flops"])
        .env("MANIFOLD_CD_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"problem": "procrustes", "n": 6, "p": 3, "epochs": 5, "seed": 3, "eta": 0.5}"#).unwrap();
    let c = cfg.to_str().unwrap();
    let from_file = bench(&["run", "--config", c, "--eta", "0.1"]);
    assert!(from_file.status.success());
    assert_eq!(from_file.stdout, bench(SMALL).stdout);
    let file_eta = bench(&["run", "--config", c]);
    assert_ne!(file_eta.stdout, from_file.stdout);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"problem": "procrustes", "stepsize": 0.5}"#).unwrap();
    let o = bench(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("stepsize"));
}

#[test]
fn presets_round_trip_as_config_files() {
    let list = stdout(&bench(&["preset"]));
    assert!(list.lines().count() >= 3);
    let dir = tempfile::tempdir().unwrap();
    for line in list.lines() {
        let name = line.split_whitespace().next().unwrap();
        let json = bench(&["preset", name]);
        assert!(json.status.success());
        let value: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
        assert!(value.get("problem").is_some(), "{name}");
        let path = dir.path().join(format!("{name}.json"));
        std::fs::write(&path, &json.stdout).unwrap();
        // Shrink the run so every preset is exercised quickly.
        let o = bench(&["run", "--config", path.to_str().unwrap(), "--epochs", "1", "--inner", "2"]);
        assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn grid_prints_the_best_stepsize_as_config() {
    let o = bench(&[
        "grid", "--problem", "procrustes", "--n", "6", "--p", "3", "--epochs", "20", "--etas", "0.001,0.1,0.5",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let value: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_ne!(value["eta"].as_f64(), Some(0.001));
    assert_eq!(bench(&["grid", "--problem", "procrustes", "--etas", "0"]).status.code(), Some(2));
}

#[test]
fn verify_and_flops_succeed() {
    let v = bench(&["verify"]);
    assert!(v.status.success(), "{}", stdout(&v));
    assert!(stdout(&v).lines().all(|l| l.starts_with("PASS")));
    let f = bench(&["flops"]);
    assert!(f.status.success());
    assert!(stdout(&f).lines().count() > 5);
}
