use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/example.json")
}

fn atl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_atl"))
        .args(args)
        .output()
        .unwrap()
}

fn check(formula: &str, extra: &[&str]) -> Output {
    let model = fixture();
    let mut args = vec![
        "check",
        "--model",
        model.to_str().unwrap(),
        "--formula",
        formula,
    ];
    args.extend_from_slice(extra);
    atl(&args)
}

fn satisfying(out: &Output) -> Vec<String> {
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    serde_json::from_value(v["satisfying"].clone()).unwrap()
}

#[test]
fn check_example() {
    let out = check("<<1>>@ (x and y)", &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(satisfying(&out), ["q2", "q3"]);

    let out = check("true", &["--backend", "direct"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(satisfying(&out), ["q0", "q1", "q2", "q3"]);
}

#[test]
fn syntax_error_exits_2() {
    let out = check("<<1>> U x", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("SyntaxError"), "{err}");
    assert!(err.contains("offset 6"), "{err}");
}

#[test]
fn formula_from_file_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let formula = dir.path().join("f.atl");
    std::fs::write(&formula, "<<1>>~ (x and y)\n").unwrap();
    let result = dir.path().join("out.json");
    let out = check(
        &format!("@{}", formula.display()),
        &["--trace", "--output", result.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_slice(&std::fs::read(result).unwrap()).unwrap();
    assert_eq!(v["satisfying"], serde_json::json!(["q2", "q3"]));
    assert!(v["trace"].as_array().unwrap().len() >= 3);
}

#[test]
fn unknown_atoms() {
    let out = check("zz", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("UnknownProposition"));
    let out = check("zz or x", &["--lenient-atoms"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(satisfying(&out), ["q1", "q3"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn validate_models() {
    let out = atl(&["validate", "--model", fixture().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let mut v: Value = serde_json::from_slice(&std::fs::read(fixture()).unwrap()).unwrap();
    v["transitions"].as_array_mut().unwrap().pop();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, v.to_string()).unwrap();
    let out = atl(&["validate", "--model", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("q3"));

    let out = atl(&["validate", "--model", "/nonexistent/model.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ttt_synthesize() {
    let out = atl(&[
        "ttt",
        "synthesize",
        "--board",
        "110220000",
        "--turn",
        "1",
        "--first",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap().trim(),
        "cell 2 tier 0 (ImmediateWin)"
    );

    let out = atl(&[
        "ttt",
        "synthesize",
        "--board",
        "100000000",
        "--turn",
        "2",
        "--first",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = atl(&[
        "ttt",
        "synthesize",
        "--board",
        "11",
        "--turn",
        "1",
        "--first",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ttt_play_scripted() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_atl"))
        .args(["ttt", "play", "--first", "user"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    // More cells than any game needs; taken ones are reprompted.
    let script: String = (0..9).cycle().take(60).map(|c| format!("{c}\n")).collect();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(script.as_bytes())
        .ok();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let last = text.lines().last().unwrap();
    assert!(last == "draw" || last == "computer wins", "{last}");
}

#[test]
fn bench_csv() {
    let out = atl(&[
        "bench",
        "--plies",
        "4,3",
        "--repetitions",
        "1",
        "--backend",
        "relational",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "states,formula,backend,milliseconds,iterations");
    assert_eq!(lines.len(), 5);

    let out = atl(&["bench", "--repetitions", "0"]);
    assert_eq!(out.status.code(), Some(2));

    let out = atl(&[
        "bench",
        "--generator",
        "random",
        "--states",
        "20",
        "--formula",
        "<<1,2>># p1",
        "--repetitions",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 3);
}
