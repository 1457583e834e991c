//! Regenerates the recorded fixture artifacts (task suites and replay
//! cassettes) and checks them against the committed copies. Run with
//! `PDDLFORGE_BLESS=1` to rewrite the committed files after an intended
//! prompt or template change.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use pddlforge::builder::ReferenceTransport;
use pddlforge::correction::{apply_feedback, Feedback};
use pddlforge::generators::{fixture_suite, recorded_reference, GeneratedTask, MASHED_ITEM_FEEDBACK};
use pddlforge::llm::{LlmError, Message, RecordingTransport, Role, Transport};
use pddlforge::orchestrator::{classical_pipeline, llm_plan_loop, Gateway, LoopStatus};
use pddlforge::pddl::{parse_domain, print_plan, print_problem, DomainModel};
use pddlforge::planner::{solve, SearchConfig};
use pddlforge::templates::TemplateSet;
use pddlforge::workspace::{Project, SuiteEntry, SUITE_FILE};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn template_prefix(id: &str) -> String {
    let body = &TemplateSet::builtin().get(id).body;
    body.split("{{").next().unwrap_or_default().to_string()
}

/// Answers every prompt the fixture flows send.
struct Oracle {
    recorded: ReferenceTransport,
    reference: ReferenceTransport,
    tasks: Vec<GeneratedTask>,
    /// Planner replies by instruction, one per round.
    planner_rounds: Vec<(String, Vec<String>)>,
    goal_prefix: String,
    planner_prefix: String,
}

impl Transport for Oracle {
    fn complete(&self, messages: &[Message]) -> Result<String, LlmError> {
        let first = messages.iter().find(|m| m.role == Role::User).expect("prompt");
        if first.content.starts_with(&self.goal_prefix) {
            let t = self
                .tasks
                .iter()
                .find(|t| first.content.contains(&t.text))
                .expect("known instruction");
            return Ok(format!("```\n{}\n```", t.goal_reply));
        }
        if first.content.starts_with(&self.planner_prefix) {
            let (_, rounds) = self
                .planner_rounds
                .iter()
                .find(|(text, _)| first.content.contains(text.as_str()))
                .expect("scripted planner task");
            let round = messages.iter().filter(|m| m.role == Role::Assistant).count();
            return Ok(rounds[round.min(rounds.len() - 1)].clone());
        }
        if messages.last().is_some_and(|m| m.content == MASHED_ITEM_FEEDBACK) {
            return self.reference.complete(messages);
        }
        self.recorded.complete(messages)
    }
}

fn copy_inputs(from: &Path, to: &Path) {
    fs::create_dir_all(to.join("problems")).unwrap();
    fs::copy(from.join("project.cfg"), to.join("project.cfg")).unwrap();
}

fn write_suite(root: &Path, tasks: &[GeneratedTask]) {
    let mut lines = String::new();
    for t in tasks {
        let file = format!("{}.pddl", t.id);
        fs::write(root.join("problems").join(&file), print_problem(&t.problem)).unwrap();
        let e = SuiteEntry {
            id: t.id.clone(),
            instruction: t.text.clone(),
            problem: file,
        };
        lines.push_str(&serde_json::to_string(&e).unwrap());
        lines.push('\n');
    }
    fs::write(root.join(SUITE_FILE), lines).unwrap();
}

/// The scripted planner for the first logistics task: the first answer
/// stops one step short, the second is the planner's own plan.
fn planner_rounds(reference: &DomainModel, tasks: &[GeneratedTask]) -> Vec<(String, Vec<String>)> {
    if reference.name != "logistics" {
        return Vec::new();
    }
    let t = &tasks[0];
    let plan = solve(reference, &t.problem, &SearchConfig::default()).unwrap().plan().unwrap().clone();
    let full = print_plan(&plan);
    let mut short = plan.clone();
    short.steps.pop();
    vec![(t.text.clone(), vec![print_plan(&short), full])]
}

fn record(name: &str, out: &Path) {
    let src = fixtures().join(name);
    let reference = parse_domain(&fs::read_to_string(src.join("reference.pddl")).unwrap()).unwrap();
    let tasks = fixture_suite(name);
    copy_inputs(&src, out);
    write_suite(out, &tasks);

    let oracle = Oracle {
        recorded: ReferenceTransport::new(recorded_reference(&reference)),
        reference: ReferenceTransport::new(reference.clone()),
        planner_rounds: planner_rounds(&reference, &tasks),
        tasks,
        goal_prefix: template_prefix("goal-translation"),
        planner_prefix: template_prefix("llm-planner"),
    };
    let cassette = out.join("cassettes").join("replay.jsonl");
    let transport: Arc<dyn Transport> = Arc::new(RecordingTransport::new(oracle, &cassette));

    let project = Project::load(out).unwrap();
    project.construct(transport.clone(), false).unwrap();
    let d = project.require_domain().unwrap();
    let gw = Gateway::new(project.templates.clone(), transport.clone(), project.config.clock());
    for e in project.load_suite().unwrap() {
        let instr = project.suite_instruction(&e, &d).unwrap();
        let _ = classical_pipeline(&gw, &instr, &d, &project.config.description, &project.config.search);
    }
    if name == "logistics" {
        let e = &project.load_suite().unwrap()[0];
        let instr = project.suite_instruction(e, &d).unwrap();
        let (outcome, _) = llm_plan_loop(&gw, &instr, &d, &project.loop_config()).unwrap();
        assert_eq!((outcome.status, outcome.rounds), (LoopStatus::Success, 2));
    }
    if name == "household" {
        let mut s = project.correction_session().unwrap();
        s.set_transport(transport.clone());
        apply_feedback(&mut s, "mash", Feedback::human(MASHED_ITEM_FEEDBACK)).unwrap();
    }
}

fn recorded_files(root: &Path) -> Vec<PathBuf> {
    let mut out = vec![PathBuf::from("cassettes/replay.jsonl")];
    let mut problems: Vec<PathBuf> = fs::read_dir(root.join("problems"))
        .unwrap()
        .map(|e| PathBuf::from("problems").join(e.unwrap().file_name()))
        .collect();
    problems.sort();
    out.extend(problems);
    out
}

#[test]
fn committed_fixture_recordings_are_current() {
    let bless = std::env::var_os("PDDLFORGE_BLESS").is_some();
    for name in ["blocksworld", "logistics", "tyreworld", "household"] {
        let tmp = tempfile::tempdir().unwrap();
        record(name, tmp.path());
        for rel in recorded_files(tmp.path()) {
            let fresh = fs::read_to_string(tmp.path().join(&rel)).unwrap();
            let committed_path = fixtures().join(name).join(&rel);
            if bless {
                fs::create_dir_all(committed_path.parent().unwrap()).unwrap();
                fs::write(&committed_path, &fresh).unwrap();
                continue;
            }
            let committed = fs::read_to_string(&committed_path)
                .unwrap_or_else(|_| panic!("{} missing; rerun with PDDLFORGE_BLESS=1", committed_path.display()));
            assert!(
                committed == fresh,
                "{} is stale; rerun with PDDLFORGE_BLESS=1",
                committed_path.display()
            );
        }
    }
}
