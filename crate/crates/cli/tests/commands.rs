//! Runs the built binary. Golden files live in `tests/golden/`; set
//! `PDDLFORGE_BLESS=1` to rewrite them.

mod common;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use pddlforge::generators::MASHED_ITEM_FEEDBACK;

use common::{constructed, fixtures, project_copy};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pddlforge"))
}

fn run(project: &Path, args: &[&str]) -> Output {
    bin().arg("-C").arg(project).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn golden(name: &str, actual: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("PDDLFORGE_BLESS").is_some() {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, actual).unwrap();
        return;
    }
    let expected = fs::read_to_string(&path).unwrap_or_else(|_| panic!("{} missing; rerun with PDDLFORGE_BLESS=1", path.display()));
    assert_eq!(expected, actual, "{} differs", path.display());
}

#[test]
fn help_text() {
    let o = bin().arg("--help").output().unwrap();
    assert!(o.status.success());
    golden("help.txt", &stdout(&o));
    let o = bin().args(["plan", "--help"]).output().unwrap();
    golden("plan-help.txt", &stdout(&o));
}

#[test]
fn usage_errors_exit_2_with_synopsis() {
    let dir = project_copy("blocksworld");
    let o = run(dir.path(), &["plan", "stack the blocks"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage: pddlforge plan"));
    let o = run(dir.path(), &["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(dir.path(), &["validate", "p.plan", "--task", "a", "--problem", "b"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn domain_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["report"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error[not-a-project]"));

    let dir = project_copy("blocksworld");
    let o = run(dir.path(), &["audit"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error[no-domain]"));
    let o = run(dir.path(), &["--format", "structured", "audit"]);
    assert_eq!(o.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(err["code"], "no-domain");
}

#[test]
fn seeded_forall_domain_fails_audit() {
    let domain = fixtures().join("seeded/forall-domain.pddl");
    let o = bin().arg("audit").arg("--domain").arg(&domain).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.starts_with("[unsupported-keyword] sweep (Effects)\n"));
    assert!(text.contains("The precondition or effect contain the keyword 'forall' that is not supported"));
}

#[test]
fn init_construct_and_trivial_plan() {
    let root = tempfile::tempdir().unwrap();
    let dir = root.path().join("bw");
    let o = bin()
        .arg("init")
        .arg(&dir)
        .args(["--description", "Blocks on a table.", "--type", "block", "--action", "pick-up: Lift a clear block."])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o), format!("initialized project bw in {}\n", dir.display()));
    let o = run(&dir, &["init", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));

    let dir = constructed("blocksworld");
    let o = run(dir.path(), &["construct"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error[already-constructed]"));

    let problem = dir.path().join("done.pddl");
    fs::write(
        &problem,
        "(define (problem done) (:domain blocksworld) (:objects b1 - block)
           (:init (on-table b1) (clear b1) (arm-empty)) (:goal (and (on-table b1))))",
    )
    .unwrap();
    let o = run(dir.path(), &["plan", "--problem", problem.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("plan (0 steps):\n"), "{text}");
}

#[test]
fn validate_and_localize_plan_files() {
    let dir = constructed("blocksworld");
    let plan = dir.path().join("bad.plan");
    fs::write(&plan, "(pick-up b2)\n(pick-up b3)\n(stack b3 b2)\n").unwrap();
    let p = plan.to_str().unwrap();
    let o = run(dir.path(), &["validate", p, "--task", "blocksworld-01"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("invalid\nstep 2: unmet-precondition\n"));
    let o = run(dir.path(), &["localize", p, "--task", "blocksworld-01"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("first failing step: 2 (unmet-precondition)\n"));

    fs::write(&plan, "(unstack b3 b1)\n(stack b3 b2)\n").unwrap();
    let o = run(dir.path(), &["validate", p, "--task", "blocksworld-01"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "valid\n");
}

#[test]
fn logistics_report_after_suite() {
    let dir = constructed("logistics");
    let o = run(dir.path(), &["plan", "--suite"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("classical: 21/21 solved\n"));
    let o = run(dir.path(), &["llm-plan", "--task", "logistics-01"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("success after 2 round(s), 1 feedback message(s)\n"));
    assert!(dir.path().join("runs/llm-plan-logistics-01.jsonl").exists());
    let o = run(dir.path(), &["report"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("  classical: 21/21 solved (100.0%), mean rounds 1.00\n"), "{text}");
    assert!(text.contains("  llm-plan: 1/1 solved (100.0%), mean rounds 2.00\n"), "{text}");
}

#[test]
fn interactive_correction_reads_stdin() {
    let dir = constructed("household");
    let mut child = bin()
        .arg("-C")
        .arg(dir.path())
        .args(["correct", "--action", "mash"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    writeln!(child.stdin.take().unwrap(), "{MASHED_ITEM_FEEDBACK}\n").unwrap();
    let o = child.wait_with_output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("Action: mash\nParameters:\n"));
    assert!(text.contains("revision 0 of mash (human feedback, fixed)\n"));
    assert!(text.contains("\n+    (not (pickupable ?o))\n"), "{text}");
    let o = run(dir.path(), &["report"]);
    assert!(stdout(&o).contains("  human messages: 1\n"));
}
