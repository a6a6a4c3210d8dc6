use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn colorforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_colorforge")).args(args).output().expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_then_eval_and_apply() {
    let dir = tempfile::tempdir().unwrap();
    let map = dir.path().join("map.json");
    let out = colorforge(&["generate", "--profile", "diverging", "--n", "11", "--iter-count", "50", "--seed", "4", "--out", path(&map)]);
    ok(&out);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("seed 4"), "{stderr}");

    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&map).unwrap()).unwrap();
    assert_eq!(doc["points"].as_array().unwrap().len(), 11);
    assert_eq!(doc["config"]["seed"], 4);

    let report: Value = serde_json::from_str(&ok(&colorforge(&["eval", path(&map), "--cvd", "off"]))).unwrap();
    assert_eq!(report["n"], 11);
    assert_eq!(report["retention"], 1.0);

    let field = dir.path().join("field.csv");
    std::fs::write(&field, "0,1,2\n3,4,5\n").unwrap();
    let png = dir.path().join("out.png");
    ok(&colorforge(&["apply", path(&map), path(&field), "--out", path(&png)]));
    let bytes = std::fs::read(&png).unwrap();
    assert_eq!(&bytes[1..4], b"PNG");
}

#[test]
fn same_seed_same_map() {
    let args = ["generate", "--n", "9", "--iter-count", "30", "--seed", "12"];
    assert_eq!(ok(&colorforge(&args)), ok(&colorforge(&args)));
}

#[test]
fn formats_follow_the_extension() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("map.csv");
    let hex = dir.path().join("map.txt");
    ok(&colorforge(&["generate", "--n", "7", "--iter-count", "20", "--seed", "1", "--out", path(&csv)]));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("index,L,A,B"), "{text}");
    ok(&colorforge(&["generate", "--n", "7", "--iter-count", "20", "--seed", "1", "--out", path(&hex)]));
    let text = std::fs::read_to_string(&hex).unwrap();
    assert_eq!(text.lines().count(), 7);
    assert!(text.lines().all(|l| l.starts_with('#') && l.len() == 7));
}

#[test]
fn refine_adds_preferences_and_edits() {
    let dir = tempfile::tempdir().unwrap();
    let map = dir.path().join("map.json");
    let refined = dir.path().join("refined.json");
    ok(&colorforge(&["generate", "--n", "9", "--iter-count", "30", "--out", path(&map)]));
    ok(&colorforge(&[
        "refine",
        path(&map),
        "--pref",
        "50,60,40@0.5±0.5",
        "--edit",
        "40,-30,20@0.2",
        "--iter-count",
        "30",
        "--out",
        path(&refined),
    ]));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&refined).unwrap()).unwrap();
    assert_eq!(doc["shelf"].as_array().unwrap().len(), 2);
}

#[test]
fn bench_writes_one_row_per_map() {
    let out = ok(&colorforge(&["bench", "--family", "diverging", "--count", "3", "--quality", "0.01"]));
    let mut lines = out.lines();
    let header = lines.next().unwrap();
    assert!(header.contains("smoothness") && header.contains("retention"), "{header}");
    assert_eq!(lines.count(), 3);
}

#[test]
fn exit_codes_distinguish_failures() {
    let bad = colorforge(&["generate", "--profile", "spiral"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("spiral"));
    let missing = colorforge(&["eval", "/nonexistent/map.json"]);
    assert_eq!(missing.status.code(), Some(2));
    let range = colorforge(&["generate", "--colorfulness", "3"]);
    assert_eq!(range.status.code(), Some(1));
}
