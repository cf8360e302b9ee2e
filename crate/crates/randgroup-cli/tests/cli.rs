use std::path::Path;
use std::process::{Command, Output};

fn randgroup(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_randgroup")).args(args).env_remove("RANDGROUP_SEED").output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn build_prints_the_worked_example() {
    let out =
        randgroup(&["build", "--variant", "core", "--stages", "1111010,1111010,1111010,1101010", "--budget", "3"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains(r#""replaced":[{"i":1,"old":"1/16","new":"9"}]"#), "{text}");
    assert!(text.contains(r#""beta":["1","9","1/3","1/4"]"#), "{text}");
}

#[test]
fn validation_errors_exit_with_2() {
    let out = randgroup(&["build", "--variant", "core", "--budget", "0"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("`budget`"), "{}", stderr(&out));
    let out = randgroup(&["learn", "--learner", "bc", "--target", "2/4"]);
    assert_eq!(code(&out), 2);
    let out = randgroup(&["learn", "--learner", "bc"]);
    assert_eq!(code(&out), 2);
    let out = randgroup(&["adversary", "--kind", "bc", "--learner", "bc"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn unknown_flags_are_usage_errors() {
    let out = randgroup(&["build", "--variant", "nope"]);
    assert_eq!(code(&out), 2);
    let out = randgroup(&["frobnicate"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn help_documents_exit_codes() {
    let out = randgroup(&["--help"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("Exit codes"));
    assert!(text.contains("RANDGROUP_SEED"));
    for sub in ["build", "learn", "adversary", "invariants", "census", "replay"] {
        assert!(text.contains(sub), "{sub}");
    }
}

#[test]
fn learn_writes_a_replayable_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("bc.jsonl");
    let out = randgroup(&[
        "learn",
        "--learner",
        "bc",
        "--target",
        "1/2",
        "--profile",
        "3,1,1,1",
        "--build-budget",
        "24",
        "--trace",
        path(&trace),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(&trace).unwrap();
    let learn: Vec<serde_json::Value> = text
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
        .filter(|v| v["kind"] == "learn")
        .collect();
    assert_eq!(learn.len(), 200);
    assert!(learn.iter().all(|v| v.get("n").is_some() && v.get("datum").is_some() && v.get("mind_change").is_some()));
    let last = &learn[199]["hypothesis"];
    assert_eq!((last["q"].as_str(), last["m"].as_str()), (Some("1"), Some("2")));
    let out = randgroup(&["replay", path(&trace)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("replay identical"));
    std::fs::write(&trace, text.replacen("\"mind_change\":true", "\"mind_change\":false", 1)).unwrap();
    assert_eq!(code(&randgroup(&["replay", path(&trace)])), 1);
}

#[test]
fn adversary_exit_codes() {
    let out =
        randgroup(&["adversary", "--kind", "ex", "--learner", "bc", "--profile", "3,1,1,1", "--build-budget", "32"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains(r#""kind":"witness""#));
    let out =
        randgroup(&["adversary", "--kind", "ex", "--learner", "exk", "--profile", "3,1,1,1", "--build-budget", "32"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert!(stdout(&out).contains(r#""kind":"exhausted""#));
    let out = randgroup(&["adversary", "--kind", "bc", "--learner", "all-equal", "--rounds", "3"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout(&out).matches(r#""kind":"falsification""#).count(), 3);
    let out = randgroup(&["adversary", "--kind", "bc", "--learner", "seen-only"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn seed_override_changes_the_text() {
    let args =
        ["learn", "--learner", "exk", "--target", "1/2", "--profile", "2,1", "--build-budget", "12", "--steps", "40"];
    let plain = stdout(&randgroup(&args));
    let seeded = |s: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_randgroup")).args(args).env("RANDGROUP_SEED", s).output().unwrap();
        String::from_utf8(out.stdout).unwrap()
    };
    assert_eq!(seeded("0"), plain);
    assert_ne!(seeded("5"), plain);
    assert_eq!(seeded("5"), seeded("5"));
    let bad = Command::new(env!("CARGO_BIN_EXE_randgroup")).args(args).env("RANDGROUP_SEED", "x").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn run_executes_config_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.json");
    let trace = dir.path().join("t.jsonl");
    std::fs::write(
        &config,
        r#"{"variant": "mod1", "schedule": {"source": "profile", "exponents": [2, 1]}, "budget": 12,
            "task": {"learn": {"learner": "mod1bc"}}, "target": "1/4", "text_length": 60}"#,
    )
    .unwrap();
    let out = randgroup(&["run", path(&config), "--out", path(&trace)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).is_empty());
    assert_eq!(code(&randgroup(&["replay", path(&trace)])), 0);
    std::fs::write(
        &config,
        r#"{"variant": "core", "schedule": {"source": "file", "path": "/no/such/file"}, "budget": 3}"#,
    )
    .unwrap();
    let out = randgroup(&["run", path(&config)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("schedule.path"));
}

#[test]
fn schedule_files_are_read() {
    let dir = tempfile::tempdir().unwrap();
    let sched = dir.path().join("s.json");
    std::fs::write(&sched, r#"{"stages": ["1111010", "1111010", "1111010", "1101010"]}"#).unwrap();
    let out = randgroup(&["build", "--variant", "core", "--schedule", path(&sched), "--budget", "3"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains(r#""new":"9""#));
}

#[test]
fn invariants_report_triples_and_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, z2) = (dir.path().join("a.json"), dir.path().join("b.json"), dir.path().join("z2.json"));
    std::fs::write(&a, "[5]").unwrap();
    std::fs::write(&b, "[0, 3]").unwrap();
    std::fs::write(&z2, r#"["inf"]"#).unwrap();
    let out = randgroup(&["invariants", "--profile", path(&a), "--n", "3"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("p=2 n=3: alpha=0 beta=0 gamma=1"), "{text}");
    assert!(text.contains("equivalent to Z: true"));
    let out = randgroup(&["invariants", "--profile", path(&a), "--profile2", path(&b)]);
    assert!(stdout(&out).contains("elementarily equivalent: true"));
    let out = randgroup(&["invariants", "--profile", path(&z2), "--profile2", path(&a)]);
    let text = stdout(&out);
    assert!(text.contains("p=2 n=1: alpha=0 beta=0 gamma=0"), "{text}");
    assert!(text.contains("elementarily equivalent: false"));
    std::fs::write(&a, "[\"lots\"]").unwrap();
    assert_eq!(code(&randgroup(&["invariants", "--profile", path(&a)])), 2);
    assert_eq!(code(&randgroup(&["invariants", "--profile", path(&b), "--n", "0"])), 2);
}

#[test]
fn census_lines() {
    let out = randgroup(&["census", "--beta", "1,1/4", "--bound", "2", "--target", "1/2"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let lines: Vec<serde_json::Value> = stdout(&out).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 25);
    let find = |s: serde_json::Value| lines.iter().find(|v| v["sigma"] == s).unwrap().clone();
    let one = find(serde_json::json!([1]));
    let two_quarters = find(serde_json::json!([0, 2]));
    assert_eq!(one["value"], "1");
    assert_eq!(two_quarters["value"], "1/2");
    assert_eq!(two_quarters["member"], true);
    assert_eq!(find(serde_json::json!([0, 1]))["member"], false);
    assert_eq!(find(serde_json::json!([1, -2]))["class"], find(serde_json::json!([0, 2]))["class"]);
    let out = randgroup(&["census", "--beta", "1", "--bound", "0"]);
    assert_eq!(stdout(&out).trim(), r#"{"class":0,"mod1_class":0,"sigma":[],"value":"0"}"#);
}
