use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use pddlforge::generators::{household_suite, logistics_suite, tyreworld_task, GeneratedTask};
use pddlforge::pddl::{parse_domain, DomainModel};
use pddlforge::planner::{solve, SearchConfig};
use pddlforge::state::validate_plan;

fn domain(name: &str) -> DomainModel {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name).join("reference.pddl");
    parse_domain(&fs::read_to_string(p).unwrap()).unwrap()
}

fn solve_all(d: &DomainModel, tasks: &[GeneratedTask]) {
    for t in tasks {
        let started = Instant::now();
        let r = solve(d, &t.problem, &SearchConfig::default()).unwrap();
        let plan = r.plan().unwrap_or_else(|| panic!("{} unsolved: {:?}", t.id, r.outcome));
        assert!(validate_plan(d, &t.problem, plan).is_valid(), "{}", t.id);
        eprintln!("{} len={} {:?}", t.id, plan.len(), started.elapsed());
    }
}

#[test]
fn logistics_suite_is_solvable() {
    solve_all(&domain("logistics"), &logistics_suite(2024, 21));
}

#[test]
fn household_suite_is_solvable() {
    solve_all(&domain("household"), &household_suite(2024, 22));
}

#[test]
fn tyreworld_tasks_are_solvable() {
    let tasks: Vec<_> = (1..=2).map(|n| tyreworld_task(&format!("tyre-{n}"), n)).collect();
    solve_all(&domain("tyreworld"), &tasks);
}
