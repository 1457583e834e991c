use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::PathBuf;
use std::sync::OnceLock;

use proptest::prelude::*;

use pddlforge::correction::{diff_lines, feedback_ledger, DiffOp, FeedbackEvent, FeedbackSource};
use pddlforge::generators::{random_domain, random_plan_case, rng};
use pddlforge::pddl::{parse_domain, parse_problem, print_domain, DomainModel, ProblemSpec};
use pddlforge::planner::{enumerate_bindings, DEFAULT_GROUNDING_CAP};
use pddlforge::state::{apply, ground_action, validate_plan, GroundAction, State};

struct Fixture {
    domain: DomainModel,
    problem: ProblemSpec,
    ground: Vec<GroundAction>,
}

fn fixture(name: &str, problem: &str) -> Fixture {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    let domain = parse_domain(&fs::read_to_string(dir.join("reference.pddl")).unwrap()).unwrap();
    let problem = parse_problem(&fs::read_to_string(dir.join("problems").join(problem)).unwrap(), &domain).unwrap();
    let ground = enumerate_bindings(&domain, &problem, DEFAULT_GROUNDING_CAP).unwrap();
    Fixture { domain, problem, ground }
}

fn fixtures() -> &'static [Fixture] {
    static F: OnceLock<Vec<Fixture>> = OnceLock::new();
    F.get_or_init(|| {
        vec![
            fixture("blocksworld", "blocksworld-01.pddl"),
            fixture("logistics", "logistics-01.pddl"),
            fixture("tyreworld", "tyreworld-01.pddl"),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn printed_domains_parse_back(seed in any::<u64>()) {
        let d = random_domain(&mut rng(seed));
        prop_assert_eq!(parse_domain(&print_domain(&d)).unwrap(), d);
    }

    /// Applying an action changes exactly its add and delete atoms, and
    /// adds win over deletes.
    #[test]
    fn apply_respects_the_frame(seed in any::<u64>(), which in 0usize..3) {
        let f = &fixtures()[which];
        let mut r = rng(seed);
        let case = random_plan_case(&f.domain, &f.problem, &f.ground, &mut r);
        let mut state = State::initial(&f.problem);
        for step in &case.plan.steps {
            let Some(schema) = f.domain.action(&step.action) else { break };
            let Ok(g) = ground_action(schema, &step.args, &f.domain, &f.problem) else { break };
            let Ok(next) = apply(&state, &g) else { break };
            let before: BTreeSet<_> = state.facts().cloned().collect();
            let after: BTreeSet<_> = next.facts().cloned().collect();
            for a in before.union(&after) {
                let expected = g.add.contains(a) || (before.contains(a) && !g.del.contains(a));
                prop_assert_eq!(after.contains(a), expected, "{}", a);
            }
            for a in &g.add {
                prop_assert!(after.contains(a));
            }
            state = next;
        }
    }

    /// A valid verdict means every step applies and the goal holds; an
    /// invalid step means every earlier step applies and this one does not.
    #[test]
    fn validator_agrees_with_apply(seed in any::<u64>(), which in 0usize..3) {
        let f = &fixtures()[which];
        let case = random_plan_case(&f.domain, &f.problem, &f.ground, &mut rng(seed));
        let report = validate_plan(&f.domain, &case.problem, &case.plan);
        let failing = report.failures.first().and_then(|x| x.step);
        let mut state = State::initial(&case.problem);
        for (i, step) in case.plan.steps.iter().enumerate() {
            let next = f
                .domain
                .action(&step.action)
                .and_then(|s| ground_action(s, &step.args, &f.domain, &case.problem).ok())
                .and_then(|g| apply(&state, &g).ok());
            match next {
                Some(n) => {
                    prop_assert_ne!(failing, Some(i + 1));
                    state = n;
                }
                None => {
                    prop_assert_eq!(failing, Some(i + 1));
                    return Ok(());
                }
            }
        }
        prop_assert_eq!(failing, None);
        let goal_holds = case.problem.goal.iter().all(|l| state.holds(l));
        prop_assert_eq!(report.is_valid(), goal_holds);
    }

    #[test]
    fn diff_reconstructs_both_sides(
        before in prop::collection::vec("[abc]{0,2}", 0..8),
        after in prop::collection::vec("[abc]{0,2}", 0..8),
    ) {
        let (b, a) = (before.join("\n"), after.join("\n"));
        let diff = diff_lines(&b, &a);
        let side = |skip: DiffOp| diff.iter().filter(|l| l.op != skip).map(|l| l.text.as_str()).collect::<Vec<_>>();
        prop_assert_eq!(side(DiffOp::Add), b.lines().collect::<Vec<_>>());
        prop_assert_eq!(side(DiffOp::Remove), a.lines().collect::<Vec<_>>());
    }

    /// Resolved issues and extra rounds are bounded by the issues and
    /// events they are derived from.
    #[test]
    fn ledger_bounds(events in prop::collection::vec((0usize..3, 0usize..3, 0usize..3, any::<bool>()), 0..30)) {
        let sources = [FeedbackSource::Auditor, FeedbackSource::Human, FeedbackSource::PlanValidation];
        let log: Vec<FeedbackEvent> = events
            .iter()
            .enumerate()
            .map(|(seq, &(action, source, issue, fixed))| FeedbackEvent {
                seq,
                source: sources[source],
                target_action: format!("act{action}"),
                text: "x".into(),
                issue: format!("issue{issue}"),
                revision: seq,
                fixed,
                introduced_new_errors: false,
                timestamp: 0,
            })
            .collect();
        let ledger = feedback_ledger(&log);
        let issues: BTreeSet<_> = log.iter().map(|e| (&e.target_action, &e.issue)).collect();
        prop_assert!(ledger.errors_resolved <= issues.len());
        prop_assert!(ledger.extra_rounds <= log.len() - issues.len());
        prop_assert_eq!(ledger.total_human_messages, log.iter().filter(|e| e.source == FeedbackSource::Human).count());
        let per_action: BTreeMap<_, usize> = ledger
            .per_action
            .iter()
            .map(|(a, c)| (a.clone(), c.auditor + c.human + c.plan_validation))
            .collect();
        prop_assert_eq!(per_action.values().sum::<usize>(), log.len());
    }
}
