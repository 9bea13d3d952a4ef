mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::fixtures;

fn benchgate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_benchgate"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn config(name: &str) -> String {
    fixtures().join(name).join("benchgate.json").display().to_string()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn read_tree(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push((path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn optimize_coverage() {
    let out = tempfile::tempdir().unwrap();
    let o = out.path().to_str().unwrap();
    let r = benchgate(&["optimize", "--config", &config("coverage"), "--out", o]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    let suite: serde_json::Value = serde_json::from_slice(&fs::read(out.path().join("suite.json")).unwrap()).unwrap();
    let selected: Vec<&str> = suite["steps"].as_array().unwrap().iter().map(|s| s["benchmark"].as_str().unwrap()).collect();
    assert_eq!(selected, ["MB1", "MB3"]);
    assert_eq!(suite["practical_relevance"], 0.8);
    let table = fs::read_to_string(out.path().join("suite.txt")).unwrap();
    assert!(table.contains("80.0%"));
}

#[test]
fn gate_exit_codes() {
    let out = tempfile::tempdir().unwrap();
    let o = |d: &str| out.path().join(d).display().to_string();
    assert_eq!(code(&benchgate(&["analyze", "--config", &config("aa"), "--out", &o("aa")])), 0);
    let reg = benchgate(&["analyze", "--config", &config("regression"), "--out", &o("reg")]);
    assert_eq!(code(&reg), 1);
    assert!(String::from_utf8_lossy(&reg.stdout).contains("REGRESSION c006 MB3"));
    let bad = fixtures().join("malformed.json").display().to_string();
    let r = benchgate(&["analyze", "--config", &bad, "--out", &o("bad")]);
    assert_eq!(code(&r), 2);
    assert!(String::from_utf8_lossy(&r.stderr).contains("malformed.json"));
}

#[test]
fn missing_inputs_exit_two_and_name_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"app_graph": "nowhere/app.json", "micro_graphs": ["x.json"]}"#).unwrap();
    let c = cfg.display().to_string();
    let r = benchgate(&["optimize", "--config", &c]);
    assert_eq!(code(&r), 2);
    assert!(String::from_utf8_lossy(&r.stderr).contains("nowhere/app.json"));

    let app = fixtures().join("coverage/app.json");
    fs::write(&cfg, serde_json::json!({"app_graph": app, "micro_graphs": []}).to_string()).unwrap();
    let r = benchgate(&["optimize", "--config", &c]);
    assert_eq!(code(&r), 2);
    assert!(String::from_utf8_lossy(&r.stderr).contains("no microbenchmark"));

    assert_eq!(code(&benchgate(&["optimize", "--config", "/definitely/not/here.json"])), 2);
    assert_eq!(code(&benchgate(&["frobnicate"])), 2);
}

#[test]
fn analyze_outputs_match_golden_and_are_stable() {
    let out = tempfile::tempdir().unwrap();
    let a = out.path().join("a");
    let b = out.path().join("b");
    for dir in [&a, &b] {
        let r = benchgate(&["analyze", "--config", &config("regression"), "--out", dir.to_str().unwrap()]);
        assert_eq!(code(&r), 1);
    }
    assert_eq!(read_tree(&a), read_tree(&b));
    let golden = fs::read_to_string(fixtures().join("regression/golden_detections.csv")).unwrap();
    assert_eq!(fs::read_to_string(a.join("detections.csv")).unwrap(), golden);
    for f in ["reports.csv", "reports.json", "detections.json", "summary.txt", "plot/MB1.csv", "plot/MB3.csv"] {
        assert!(a.join(f).is_file(), "missing {f}");
    }
    let dets: serde_json::Value = serde_json::from_slice(&fs::read(a.join("detections.json")).unwrap()).unwrap();
    assert_eq!(dets[0]["reference_impact_s"], 15.0);

    let report = benchgate(&["report", "--out", a.to_str().unwrap()]);
    assert_eq!(code(&report), 0);
    assert_eq!(String::from_utf8_lossy(&report.stdout), fs::read_to_string(a.join("summary.txt")).unwrap());

    // A different seed changes the intervals but not the verdict.
    let c = out.path().join("c");
    let r = benchgate(&["analyze", "--config", &config("regression"), "--out", c.to_str().unwrap(), "--seed", "99"]);
    assert_eq!(code(&r), 1);
    assert_ne!(fs::read(a.join("reports.csv")).unwrap(), fs::read(c.join("reports.csv")).unwrap());
}

#[test]
fn plans() {
    let out = tempfile::tempdir().unwrap();
    let o = out.path().to_str().unwrap();
    let r = benchgate(&["plan", "rmit", "--config", &config("coverage"), "--out", o, "--seed", "3"]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    let plan: serde_json::Value = serde_json::from_slice(&fs::read(out.path().join("plan_rmit.json")).unwrap()).unwrap();
    assert_eq!(plan["suite"], serde_json::json!(["MB1", "MB3"]));
    assert_eq!(plan["runs"].as_array().unwrap().len(), 9);

    let cfg = out.path().join("duet.json");
    fs::write(&cfg, r#"{"duet": {"base_ref": "v1", "variation_ref": "v1", "workload": "influxdb"}}"#).unwrap();
    let r = benchgate(&["plan", "duet", "--config", cfg.to_str().unwrap(), "--out", o]);
    assert_eq!(code(&r), 0);
    assert!(String::from_utf8_lossy(&r.stderr).contains("A/A"));
    let plan: serde_json::Value = serde_json::from_slice(&fs::read(out.path().join("plan_duet.json")).unwrap()).unwrap();
    assert_eq!(plan["workload"]["batches"], 113_400);

    fs::write(&cfg, r#"{"duet": {"base_ref": "v1", "variation_ref": "v2", "workload": "influxdb", "repetitions": 2}}"#).unwrap();
    assert_eq!(code(&benchgate(&["plan", "duet", "--config", cfg.to_str().unwrap(), "--out", o])), 2);
}

#[test]
fn simulate_writes_series_and_scores() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("scenario.json");
    fs::write(
        &scenario,
        r#"{"name": "smoke", "seed": 5, "runs": 3, "bootstrap": {"samples": 300},
            "history": {"n_commits": 12, "noise": {"iteration": 0.01},
                        "injections": [{"commit": 6, "kind": "jump", "magnitude_pct": 10.0}]},
            "matrix": {"magnitudes_pct": [10.0], "noise_pct": [1.0], "runs": 2, "n_commits": 8}}"#,
    )
    .unwrap();
    let run = |out: &Path| benchgate(&["simulate", scenario.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(code(&run(&a)), 0);
    assert_eq!(code(&run(&b)), 0);
    assert_eq!(read_tree(&a), read_tree(&b));
    for f in ["series/manifest.json", "series/micro/c000.csv", "labels.json", "evaluation.csv", "evaluation.json", "matrix.csv"] {
        assert!(a.join(f).is_file(), "missing {f}");
    }
    assert_eq!(fs::read_to_string(a.join("evaluation.csv")).unwrap().lines().count(), 4);

    // The written series analyzes like the in-memory one.
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"manifest": "a/series/manifest.json", "bootstrap": {"samples": 300}}"#).unwrap();
    let r = benchgate(&["analyze", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("an").to_str().unwrap()]);
    assert_eq!(code(&r), 1);
}
