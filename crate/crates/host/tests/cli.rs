use std::path::Path;
use std::process::{Command, Output};

fn assistvr(args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_assistvr")).args(args).output().unwrap();
    assert!(
        out.status.success(),
        "assistvr {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn plan_prints_108_specs() {
    let out = assistvr(&["plan", "--participant", "5", "--order", "5"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 108);
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["participant"], 5);
    }
}

#[test]
fn script_replay_filter_summarize() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("p3.script");
    let log_a = dir.path().join("a.jsonl");
    let log_b = dir.path().join("b.jsonl");
    assistvr(&["script", "--participant", "3", "--order", "3", "--seed", "9", "--out", path(&script)]);
    assistvr(&["replay", path(&script), "--out", path(&log_a)]);
    assistvr(&["replay", path(&script), "--out", path(&log_b)]);
    let a = std::fs::read(&log_a).unwrap();
    assert_eq!(a, std::fs::read(&log_b).unwrap(), "replay is deterministic");
    let records = assistvr::records::read_records_file(&log_a).unwrap();
    assert_eq!(records.len(), 108);

    let kept = dir.path().join("kept.jsonl");
    let removed = dir.path().join("removed.jsonl");
    assistvr(&["filter", path(&log_a), "--kept", path(&kept), "--removed", path(&removed)]);
    let k = assistvr::records::read_records_file(&kept).unwrap().len();
    let r = assistvr::records::read_records_file(&removed).unwrap().len();
    assert_eq!(k + r, 108);

    let csv = dir.path().join("summary.csv");
    assistvr(&["summarize", path(&log_a), "--filter", "--out", path(&csv)]);
    let csv = std::fs::read_to_string(csv).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(assistvr::records::SUMMARY_HEADER));
    // 2 techniques x 3 levels x 3 target counts x 2 phases.
    assert_eq!(lines.count(), 36);
}

#[test]
fn scene_dump_counts_objects() {
    let out = assistvr(&["scene", "dump", "--level", "high", "--targets", "4", "--seed", "3", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["objects"].as_array().unwrap().len(), 124);
    let text = assistvr(&["scene", "dump", "--level", "low", "--seed", "3"]).stdout;
    let scene = assistvr_core::Scene::from_text(std::str::from_utf8(&text).unwrap()).unwrap();
    assert_eq!(scene.objects.len(), 121);
}

#[test]
fn lexicon_dump_checks_clean() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("lexicon.tsv");
    std::fs::write(&table, assistvr(&["lexicon", "dump"]).stdout).unwrap();
    let out = assistvr(&["lexicon", "check", path(&table)]);
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("ok:"));
}

#[test]
fn run_reads_commands_from_stdin() {
    use std::io::Write;
    use std::process::Stdio;
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("run.jsonl");
    let mut child = Command::new(env!("CARGO_BIN_EXE_assistvr"))
        .args(["run", "--practice", "--records", path(&log)])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"say select all purple cubes\nfly\nstatus\nquit\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("panel \"select all purple cubes\""), "{text}");
    assert!(text.contains("error: unknown command `fly`"), "{text}");
}

#[test]
fn bad_input_fails_cleanly() {
    for args in [
        &["scene", "dump", "--level", "extreme", "--seed", "1"][..],
        &["scene", "dump", "--level", "low", "--targets", "3", "--seed", "1"],
        &["plan", "--participant", "0", "--order", "24"],
        &["replay", "/nonexistent/script"],
    ] {
        let out = Command::new(env!("CARGO_BIN_EXE_assistvr")).args(args).output().unwrap();
        assert!(!out.status.success(), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}
