mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::*;

fn hornchain(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hornchain")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hornchain-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn verify_running_example_is_safe() {
    let path = fixture_path("running.chc");
    let o = hornchain(&["verify", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.ends_with("VERDICT: safe\n"), "{out}");
    for line in fixture("running_model.txt").lines() {
        assert!(out.lines().any(|l| l == line), "missing {line} in {out}");
    }
}

#[test]
fn verify_unknown_exits_two() {
    let dir = scratch("unknown");
    let path = write(&dir, "bad.chc", "false :- A=0, p(A).\np(A) :- A=0.\n");
    let o = hornchain(&["verify", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).ends_with("VERDICT: unknown\n"));
}

#[test]
fn errors_exit_one() {
    let dir = scratch("errors");
    let path = write(&dir, "broken.chc", "false :- p(A.\n");
    let o = hornchain(&["verify", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    assert_eq!(hornchain(&["verify", "/nonexistent/file.chc"]).status.code(), Some(1));
    assert_eq!(hornchain(&["verify"]).status.code(), Some(1));
    assert_eq!(hornchain(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(hornchain(&["--help"]).status.code(), Some(0));
}

#[test]
fn dump_writes_every_stage() {
    let dir = scratch("dump");
    let path = write(&dir, "ex.chc", &fixture("running.chc"));
    let o = hornchain(&["verify", "--dump", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    for stage in ["raf", "unfold", "qa", "split"] {
        let dumped = dir.join(format!("ex.{stage}.chc"));
        let text = std::fs::read_to_string(&dumped).unwrap();
        hornchain::parse_program(&text).unwrap();
    }
    let split = std::fs::read_to_string(dir.join("ex.split.chc")).unwrap();
    assert!(split.contains("new3_query___2"));
}

#[test]
fn skip_flags_are_accepted() {
    let path = fixture_path("running.chc");
    let p = path.to_str().unwrap();
    let o = hornchain(&["verify", "--skip-raf", "--skip-thresholds", "--widen-delay", "3", p]);
    assert_eq!(o.status.code(), Some(0));
    let o = hornchain(&["verify", "--skip-qa", "--skip-split", "--tp-cap", "50", p]);
    assert!(matches!(o.status.code(), Some(0 | 2)));
    assert!(stdout(&o).contains("VERDICT: "));
}

#[test]
fn stage_subcommands_print_programs() {
    let running = fixture_path("running.chc");
    let unfolded_path = fixture_path("running_unfolded.chc");
    let qa_path = fixture_path("running_qa.chc");
    let parsed = |args: &[&str]| {
        let o = hornchain(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}");
        hornchain::parse_program(&stdout(&o)).unwrap()
    };
    let unfolded = parsed(&["unfold", running.to_str().unwrap()]);
    assert!(hornchain::compare::programs_equivalent(&unfolded, &fixture_program("running_unfolded.chc")));
    let qa = parsed(&["qa", unfolded_path.to_str().unwrap()]);
    assert!(hornchain::compare::programs_equivalent(&qa, &fixture_program("running_qa.chc")));
    assert_eq!(parsed(&["split", qa_path.to_str().unwrap()]).len(), 30);
    assert_eq!(parsed(&["parse", running.to_str().unwrap()]).len(), fixture_program("running.chc").len());
    assert!(!parsed(&["raf", running.to_str().unwrap()]).is_empty());
}

#[test]
fn thresholds_and_analyze_subcommands() {
    let unfolded = fixture_path("running_unfolded.chc");
    let o = hornchain(&["thresholds", unfolded.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 14);
    assert!(stdout(&o).lines().all(|l| l.starts_with("new3(A,B) :- [")));

    let dir = scratch("analyze");
    let split = hornchain(&["split", fixture_path("running_qa.chc").to_str().unwrap()]);
    let path = write(&dir, "split.chc", &stdout(&split));
    let o = hornchain(&["analyze", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("VERDICT: safe\n"), "{}", stdout(&o));
}
