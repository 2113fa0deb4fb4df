use std::path::PathBuf;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ifc-mcp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn path(rel: &str) -> String {
    root().join(rel).display().to_string()
}

#[test]
fn replay_passes_and_saves() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("l.ifc");
    let o = bin(&["--seed", "1", "replay", &path("traces/l_building.json"), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().all(|l| !l.contains("FAILED")), "{text}");
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("ISO-10303-21;"));

    let again = dir.path().join("l2.ifc");
    assert!(bin(&["--seed", "1", "replay", &path("traces/l_building.json"), "--out", again.to_str().unwrap()]).status.success());
    assert_eq!(std::fs::read_to_string(&out).unwrap(), std::fs::read_to_string(&again).unwrap());
}

#[test]
fn failing_trace_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("bad.json");
    std::fs::write(
        &t,
        r#"{"name":"bad","steps":[{"tool":"create_wall","args":{"start":[0,0],"end":[4,0]},"expect":{"result":{"guid":"nope"}}}]}"#,
    )
    .unwrap();
    let o = bin(&["replay", t.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn missing_file_exits_two() {
    let o = bin(&["open", "/definitely/not/here.ifc"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot read"));
}

#[test]
fn open_prints_overview() {
    let o = bin(&["open", &path("tests/fixtures/four_walls.ifc")]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["class_counts"]["IfcWall"], 4);
}

#[test]
fn new_save_and_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let fresh = dir.path().join("fresh.ifc");
    assert!(bin(&["--seed", "3", "new", fresh.to_str().unwrap()]).status.success());
    let copy = dir.path().join("copy.ifc");
    assert!(bin(&["--seed", "3", "save", fresh.to_str().unwrap(), copy.to_str().unwrap()]).status.success());
    assert_eq!(std::fs::read_to_string(&fresh).unwrap(), std::fs::read_to_string(&copy).unwrap());

    let plan = dir.path().join("plan.svg");
    let south = dir.path().join("south.svg");
    let o = bin(&[
        "snapshot",
        &path("tests/fixtures/four_walls.ifc"),
        "--plan",
        plan.to_str().unwrap(),
        "--elevation",
        &format!("south={}", south.display()),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let svg = std::fs::read_to_string(&plan).unwrap();
    assert_eq!(svg.matches("class=\"wall\"").count(), 4);
    assert!(std::fs::read_to_string(&south).unwrap().contains("<svg "));
    assert_eq!(bin(&["snapshot", &path("tests/fixtures/four_walls.ifc")]).status.code(), Some(2));
}

#[test]
fn index_writes_default_location() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("a.md"), "IfcWall is a vertical element").unwrap();
    let o = bin(&["index", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    assert!(dir.path().join(".ifc-mcp-index").is_file());
}

#[test]
fn serve_over_stdio() {
    use std::io::Write;
    use std::process::Stdio;
    let mut child = Command::new(env!("CARGO_BIN_EXE_ifc-mcp"))
        .args(["--seed", "4", "serve", "--groups", "q"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut stdin = child.stdin.take().unwrap();
    writeln!(stdin, r#"{{"jsonrpc":"2.0","id":1,"method":"initialize","params":{{}}}}"#).unwrap();
    writeln!(stdin, r#"{{"jsonrpc":"2.0","id":2,"method":"tools/list"}}"#).unwrap();
    drop(stdin);
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let lines: Vec<serde_json::Value> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 2);
    let tools = lines[1]["result"]["tools"].as_array().unwrap();
    assert!(tools.iter().all(|t| t["annotations"]["readOnlyHint"] == true));
}

#[test]
fn sample_corpus_answers_over_mcp() {
    use std::io::Write;
    use std::process::Stdio;
    let mut child = Command::new(env!("CARGO_BIN_EXE_ifc-mcp"))
        .args(["serve", "--groups", "k"])
        .env("IFC_MCP_CORPUS", path("corpus"))
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut stdin = child.stdin.take().unwrap();
    writeln!(
        stdin,
        r#"{{"jsonrpc":"2.0","id":1,"method":"tools/call","params":{{"name":"search_ifc_knowledge","arguments":{{"query":"IfcRelVoidsElement","k":1}}}}}}"#
    )
    .unwrap();
    drop(stdin);
    let out = child.wait_with_output().unwrap();
    let frame: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let text = frame["result"]["content"][0]["text"].as_str().unwrap();
    let hits: serde_json::Value = serde_json::from_str(text).unwrap();
    assert_eq!(hits["results"][0]["doc_id"], "ifc/openings.md");
}
