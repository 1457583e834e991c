//! Planning with a constructed model: instruction-to-goal translation, the
//! classical planner pipeline, and a language-model planner driven by
//! validation feedback.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::llm::{complete, Clock, Conversation, LlmError, Role, Transport};
use crate::nl::{describe_literal, render_model_nl, Mood};
use crate::pddl::{
    check_ground_atom, parse_goal, parse_plan, print_action, print_plan, DomainModel, Literal,
    Plan, PlanStep, ProblemSpec,
};
use crate::planner::{solve, Outcome, PlanResult, PlannerError, SearchConfig, SearchStats};
use crate::registry::PredicateRegistry;
use crate::state::{validate_plan_against, FailureKind, ValidationReport};
use crate::templates::TemplateSet;

/// Default bound on planner rounds per task.
pub const DEFAULT_ROUND_CAP: usize = 8;

/// Templates, transport and clock used for every model call.
#[derive(Clone)]
pub struct Gateway {
    pub templates: TemplateSet,
    pub transport: Arc<dyn Transport>,
    pub clock: Clock,
}

impl Gateway {
    pub fn new(templates: TemplateSet, transport: Arc<dyn Transport>, clock: Clock) -> Self {
        Self {
            templates,
            transport,
            clock,
        }
    }

    /// One-shot exchange in a fresh conversation.
    fn ask(&self, id: &str, prompt: String) -> Result<(String, Conversation), LlmError> {
        let mut c = Conversation::new(id);
        c.push(Role::User, prompt, self.clock);
        let i = complete(&mut c, self.transport.as_ref(), self.clock)?;
        Ok((c.messages()[i].content.clone(), c))
    }
}

/// Required order between two steps, each named by an action or by a full
/// ground step such as `(heat-food potato)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderingConstraint {
    pub first: String,
    pub then: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instruction {
    pub id: String,
    pub text: String,
    /// Objects and initial state; its goal is ignored.
    pub context: ProblemSpec,
    /// Goal to use instead of translating `text`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal: Option<Vec<Literal>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub orderings: Vec<OrderingConstraint>,
}

impl Instruction {
    pub fn new(id: impl Into<String>, text: impl Into<String>, context: ProblemSpec) -> Self {
        Self {
            id: id.into(),
            text: text.into(),
            context,
            goal: None,
            orderings: Vec::new(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum OrchestratorError {
    #[error("goal translation rejected: {violation}")]
    UntranslatableGoal { reply: String, violation: String },
    #[error(transparent)]
    Planner(#[from] PlannerError),
    #[error(transparent)]
    Llm(#[from] LlmError),
}

/// Text between the first pair of ``` fences, or the first balanced
/// parenthesized region.
pub fn extract_pddl(reply: &str) -> Option<&str> {
    if let Some(start) = reply.find("```") {
        let after = &reply[start + 3..];
        let body_start = after.find('\n').map(|i| i + 1).unwrap_or(0);
        if let Some(end) = after[body_start..].find("```") {
            return Some(after[body_start..body_start + end].trim());
        }
    }
    crate::pddl::sexpr::find_balanced(reply).map(|(s, e)| &reply[s..e])
}

fn render_objects(p: &ProblemSpec) -> String {
    if p.objects.is_empty() {
        return "None".into();
    }
    p.objects
        .iter()
        .map(|o| format!("- {}: {}", o.name, o.ty))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Checks a goal against the registry and the task's objects.
pub fn check_goal_literals(goal: &[Literal], reg: &PredicateRegistry, d: &DomainModel, p: &ProblemSpec) -> Result<(), String> {
    let mut scope = DomainModel::new(d.name.clone());
    scope.types = d.types.clone();
    scope.predicates = reg.entries().to_vec();
    for l in goal {
        check_ground_atom(&l.atom, &scope, p).map_err(|e| format!("{}: {e}", l))?;
    }
    Ok(())
}

/// Asks for a goal and accepts it only if every predicate, object and type
/// checks out. Returns the goal and the exchange.
pub fn translate_goal(
    gw: &Gateway,
    instr: &Instruction,
    reg: &PredicateRegistry,
    d: &DomainModel,
    domain_description: &str,
) -> Result<(Vec<Literal>, Conversation), OrchestratorError> {
    let b: BTreeMap<&str, String> = [
        ("domain_description", domain_description.trim().to_string()),
        ("predicates", reg.render_for_prompt()),
        ("objects", render_objects(&instr.context)),
        ("instruction", instr.text.trim().to_string()),
    ]
    .into_iter()
    .collect();
    let prompt = gw.templates.render("goal-translation", &b)?;
    let (reply, conv) = gw.ask(&format!("goal-{}", instr.id), prompt)?;
    let reject = |violation: String| OrchestratorError::UntranslatableGoal {
        reply: reply.clone(),
        violation,
    };
    let text = extract_pddl(&reply).ok_or_else(|| reject("no PDDL goal found in the reply".into()))?;
    let goal = parse_goal(text).map_err(|e| reject(e.to_string()))?;
    check_goal_literals(&goal, reg, d, &instr.context).map_err(reject)?;
    Ok((goal, conv))
}

fn resolve_goal(
    gw: &Gateway,
    instr: &Instruction,
    d: &DomainModel,
    domain_description: &str,
) -> Result<(Vec<Literal>, Option<Conversation>), OrchestratorError> {
    let reg = PredicateRegistry::from_domain(d);
    match &instr.goal {
        Some(g) => {
            check_goal_literals(g, &reg, d, &instr.context).map_err(|v| OrchestratorError::UntranslatableGoal {
                reply: String::new(),
                violation: v,
            })?;
            Ok((g.clone(), None))
        }
        None => {
            let (g, c) = translate_goal(gw, instr, &reg, d, domain_description)?;
            Ok((g, Some(c)))
        }
    }
}

#[derive(Clone, Debug)]
pub struct PipelineRun {
    pub problem: ProblemSpec,
    pub result: PlanResult,
    pub translation: Option<Conversation>,
}

/// Goal translation followed by the planner. Returned plans have already
/// passed validation inside [`solve`].
pub fn classical_pipeline(
    gw: &Gateway,
    instr: &Instruction,
    d: &DomainModel,
    domain_description: &str,
    cfg: &SearchConfig,
) -> Result<PipelineRun, OrchestratorError> {
    let (goal, translation) = resolve_goal(gw, instr, d, domain_description)?;
    let mut problem = instr.context.clone();
    problem.goal = goal;
    let result = solve(d, &problem, cfg)?;
    Ok(PipelineRun {
        problem,
        result,
        translation,
    })
}

fn numbered(lits: &[Literal], reg: &PredicateRegistry) -> String {
    lits.iter()
        .enumerate()
        .map(|(i, l)| format!("{}. {}", i + 1, describe_literal(l, reg, Mood::Fact)))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Feedback text for the first failure of an invalid report; empty for a
/// valid one.
pub fn translate_validation_feedback(r: &ValidationReport, reg: &PredicateRegistry, templates: &TemplateSet) -> String {
    let Some(f) = r.first_failure() else {
        return String::new();
    };
    let step = f.step.map(|s| s.to_string()).unwrap_or_default();
    match f.kind {
        FailureKind::UnmetPrecondition => templates.fill(
            "validation-unmet-precondition",
            &[("step", &step), ("unmet", &numbered(&f.unmet, reg))],
        ),
        FailureKind::UnmetGoal => templates.fill("validation-unmet-goal", &[("unmet", &numbered(&f.unmet, reg))]),
        FailureKind::InvalidParameter => {
            let problem = f.detail.as_ref().map(|d| d.to_string()).unwrap_or_default();
            templates.fill("validation-invalid-parameter", &[("step", &step), ("problem", &problem)])
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Translation {
    Plan(Plan),
    FormatError { step: usize, message: String },
}

const ARTICLES: [&str; 3] = ["the", "a", "an"];

/// Plan lines without list markers, step labels or blank lines.
fn step_lines(raw: &str) -> Vec<String> {
    let mut out = Vec::new();
    for line in raw.lines() {
        let mut l = line.trim().trim_matches('`').trim();
        if l.is_empty() || l.starts_with(';') {
            continue;
        }
        l = l.trim_start_matches(['-', '*']).trim_start();
        let lower = l.to_lowercase();
        if lower.starts_with("step ") {
            if let Some(i) = l.find(':') {
                l = l[i + 1..].trim_start();
            }
        }
        let digits = l.chars().take_while(char::is_ascii_digit).count();
        if digits > 0 && l[digits..].starts_with(['.', ')', ':']) {
            l = l[digits + 1..].trim_start();
        }
        if !l.is_empty() {
            out.push(l.to_string());
        }
    }
    out
}

fn well_formed(step: &PlanStep, d: &DomainModel, objects: &ProblemSpec) -> bool {
    d.action(&step.action).is_some_and(|a| a.params.len() == step.args.len())
        && step.args.iter().all(|o| objects.object_type(o).is_some())
}

fn exact(line: &str, d: &DomainModel, p: &ProblemSpec) -> Option<PlanStep> {
    let plan = parse_plan(line).ok()?;
    match plan.steps.as_slice() {
        [s] if well_formed(s, d, p) => Some(s.clone()),
        _ => None,
    }
}

fn fuzzy(line: &str, d: &DomainModel, p: &ProblemSpec) -> Option<PlanStep> {
    let cleaned: String = line
        .to_lowercase()
        .chars()
        .map(|c| if c == '(' || c == ')' || c == ',' { ' ' } else { c })
        .collect();
    let tokens: Vec<&str> = cleaned
        .trim_end_matches('.')
        .split_whitespace()
        .filter(|t| !ARTICLES.contains(t))
        .collect();
    for a in &d.actions {
        let words: Vec<&str> = a.name.split(['-', '_']).collect();
        let glued = tokens.first().is_some_and(|t| t.replace('_', "-") == a.name);
        let skip = if glued {
            1
        } else if tokens.len() >= words.len() && tokens[..words.len()] == words[..] {
            words.len()
        } else {
            continue;
        };
        let step = PlanStep::new(a.name.clone(), tokens[skip..].iter().copied());
        if well_formed(&step, d, p) {
            return Some(step);
        }
    }
    None
}

/// Reads a planner reply into a plan. Each line is tried as a canonical
/// step, then after normalizing case, punctuation and articles, then
/// through the action-translation template when a gateway is given.
pub fn translate_actions(
    raw: &str,
    d: &DomainModel,
    p: &ProblemSpec,
    gw: Option<&Gateway>,
) -> Result<(Translation, usize), LlmError> {
    let mut steps = Vec::new();
    let mut calls = 0;
    let signatures = || {
        d.actions
            .iter()
            .map(|a| {
                let params: Vec<String> = a.params.iter().map(|p| format!("{} - {}", p.name, p.ty)).collect();
                format!("({} {})", a.name, params.join(" "))
            })
            .collect::<Vec<_>>()
            .join("\n")
    };
    for (i, line) in step_lines(raw).iter().enumerate() {
        if let Some(s) = exact(line, d, p).or_else(|| fuzzy(line, d, p)) {
            steps.push(s);
            continue;
        }
        let translated = match gw {
            Some(gw) => {
                calls += 1;
                let prompt = gw
                    .templates
                    .fill("action-translation", &[("actions", &signatures()), ("step", line)]);
                let (reply, _) = gw.ask("action-translation", prompt)?;
                extract_pddl(&reply).and_then(|t| exact(t, d, p))
            }
            None => None,
        };
        match translated {
            Some(s) => steps.push(s),
            None => {
                let step = i + 1;
                let message = gw
                    .map(|g| &g.templates)
                    .unwrap_or(TemplateSet::builtin())
                    .fill("plan-format-error", &[("step", &step.to_string())]);
                return Ok((Translation::FormatError { step, message }, calls));
            }
        }
    }
    Ok((Translation::Plan(Plan::new(steps)), calls))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LoopStatus {
    Success,
    Exhausted,
    InvalidTranslation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LoopOutcome {
    pub status: LoopStatus,
    pub rounds: usize,
    pub plan: Option<Plan>,
    pub feedback_messages: usize,
    /// The planner proposed a plan identical to an earlier rejected one.
    pub duplicate_plan: bool,
    /// Stated orderings the successful plan does not respect.
    pub ordering_violations: Vec<String>,
    pub transcript: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct LoopConfig {
    pub cap: usize,
    pub domain_description: String,
    /// Fixed in-prompt examples for the domain.
    pub examples: String,
}

impl Default for LoopConfig {
    fn default() -> Self {
        Self {
            cap: DEFAULT_ROUND_CAP,
            domain_description: String::new(),
            examples: String::new(),
        }
    }
}

fn matches_step(pattern: &str, s: &PlanStep) -> bool {
    let pattern = pattern.trim();
    if pattern.starts_with('(') {
        parse_plan(pattern).is_ok_and(|p| p.steps.first() == Some(s))
    } else {
        pattern.eq_ignore_ascii_case(&s.action)
    }
}

/// Orderings not respected by `plan`: the first step matching `then` must
/// come after some step matching `first`.
pub fn check_orderings(plan: &Plan, orderings: &[OrderingConstraint]) -> Vec<String> {
    let mut out = Vec::new();
    for o in orderings {
        let first = plan.steps.iter().position(|s| matches_step(&o.first, s));
        let then = plan.steps.iter().position(|s| matches_step(&o.then, s));
        let ok = match (first, then) {
            (Some(a), Some(b)) => a < b,
            _ => false,
        };
        if !ok {
            out.push(format!("'{}' must happen before '{}'", o.first, o.then));
        }
    }
    out
}

/// Planner prompt for a task.
pub fn planner_prompt(gw: &Gateway, instr: &Instruction, d: &DomainModel, cfg: &LoopConfig) -> Result<String, LlmError> {
    let reg = PredicateRegistry::from_domain(d);
    let actions = d
        .actions
        .iter()
        .map(|a| render_model_nl(a, &reg).unwrap_or_else(|_| print_action(a, 0)))
        .collect::<Vec<_>>()
        .join("\n");
    let mut problem = format!("Objects:\n{}\nInitial state:\n", render_objects(&instr.context));
    if instr.context.init.is_empty() {
        problem.push_str("None");
    }
    let init: Vec<String> = instr
        .context
        .init
        .iter()
        .map(|a| format!("- {}", describe_literal(&Literal::pos(a.clone()), &reg, Mood::Fact)))
        .collect();
    problem.push_str(&init.join("\n"));
    let or_none = |s: &str| if s.trim().is_empty() { "None".to_string() } else { s.trim().to_string() };
    let b: BTreeMap<&str, String> = [
        ("domain_description", or_none(&cfg.domain_description)),
        ("actions", actions.trim_end().to_string()),
        ("examples", or_none(&cfg.examples)),
        ("problem", problem),
        ("instruction", instr.text.trim().to_string()),
    ]
    .into_iter()
    .collect();
    gw.templates.render("llm-planner", &b)
}

/// Asks the planner model for a plan, validates it against the model and
/// feeds failures back until a plan validates or `cap` rounds are used.
pub fn llm_plan_loop(
    gw: &Gateway,
    instr: &Instruction,
    d: &DomainModel,
    cfg: &LoopConfig,
) -> Result<(LoopOutcome, Conversation), LlmError> {
    let transcript = format!("llm-plan-{}", instr.id);
    let mut conv = Conversation::new(transcript.clone()).tagged([instr.id.clone(), "llm-plan".into()]);
    let mut outcome = LoopOutcome {
        status: LoopStatus::Exhausted,
        rounds: 0,
        plan: None,
        feedback_messages: 0,
        duplicate_plan: false,
        ordering_violations: Vec::new(),
        transcript,
        error: None,
    };
    let goal = match resolve_goal(gw, instr, d, &cfg.domain_description) {
        Ok((g, _)) => g,
        Err(OrchestratorError::Llm(e)) => return Err(e),
        Err(e) => {
            outcome.status = LoopStatus::InvalidTranslation;
            outcome.error = Some(e.to_string());
            return Ok((outcome, conv));
        }
    };
    let reg = PredicateRegistry::from_domain(d);
    conv.push(Role::User, planner_prompt(gw, instr, d, cfg)?, gw.clock);
    let mut seen: Vec<Plan> = Vec::new();
    while outcome.rounds < cfg.cap {
        let i = complete(&mut conv, gw.transport.as_ref(), gw.clock)?;
        outcome.rounds += 1;
        let reply = conv.messages()[i].content.clone();
        let feedback = match translate_actions(&reply, d, &instr.context, Some(gw))?.0 {
            Translation::FormatError { message, .. } => message,
            Translation::Plan(plan) => {
                let report = validate_plan_against(d, &instr.context, &plan, &goal);
                if report.is_valid() {
                    outcome.status = LoopStatus::Success;
                    outcome.ordering_violations = check_orderings(&plan, &instr.orderings);
                    outcome.plan = Some(plan);
                    return Ok((outcome, conv));
                }
                if seen.contains(&plan) {
                    outcome.duplicate_plan = true;
                }
                seen.push(plan.clone());
                outcome.plan = Some(plan);
                translate_validation_feedback(&report, &reg, &gw.templates)
            }
        };
        if outcome.rounds < cfg.cap {
            conv.push(Role::User, feedback, gw.clock);
            outcome.feedback_messages += 1;
        }
    }
    Ok((outcome, conv))
}

/// One line of a run log.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunRecord {
    pub task_id: String,
    pub mode: String,
    pub rounds: usize,
    pub outcome: String,
    pub plan: Option<Vec<String>>,
    pub wall_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<SearchStats>,
    #[serde(default)]
    pub duplicate_plan: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn plan_lines(p: &Plan) -> Vec<String> {
    print_plan(p).lines().map(str::to_string).collect()
}

impl RunRecord {
    pub fn solved(&self) -> bool {
        self.outcome == "plan" || self.outcome == "success"
    }

    pub fn classical(task_id: &str, run: &Result<PipelineRun, OrchestratorError>, started: Instant) -> Self {
        let wall_ms = started.elapsed().as_millis() as u64;
        let mut r = RunRecord {
            task_id: task_id.to_string(),
            mode: "classical".into(),
            rounds: 1,
            outcome: String::new(),
            plan: None,
            wall_ms,
            stats: None,
            duplicate_plan: false,
            error: None,
        };
        match run {
            Ok(run) => {
                r.stats = Some(run.result.stats.clone());
                match &run.result.outcome {
                    Outcome::Plan(p) => {
                        r.outcome = "plan".into();
                        r.plan = Some(plan_lines(p));
                    }
                    Outcome::Unsolvable => r.outcome = "unsolvable".into(),
                    Outcome::ResourceLimit { reason } => {
                        r.outcome = "resource-limit".into();
                        r.error = Some(reason.clone());
                    }
                }
            }
            Err(e @ OrchestratorError::UntranslatableGoal { .. }) => {
                r.outcome = "invalid-translation".into();
                r.error = Some(e.to_string());
            }
            Err(e) => {
                r.outcome = "error".into();
                r.error = Some(e.to_string());
            }
        }
        r
    }

    pub fn llm(task_id: &str, o: &LoopOutcome, started: Instant) -> Self {
        let status = serde_json::to_value(o.status).expect("enum serializes");
        RunRecord {
            task_id: task_id.to_string(),
            mode: "llm-plan".into(),
            rounds: o.rounds,
            outcome: status.as_str().unwrap_or_default().to_string(),
            plan: o.plan.as_ref().filter(|_| o.status == LoopStatus::Success).map(plan_lines),
            wall_ms: started.elapsed().as_millis() as u64,
            stats: None,
            duplicate_plan: o.duplicate_plan,
            error: o.error.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::ScriptedTransport;
    use crate::pddl::{parse_domain, parse_problem, Atom};

    const DOMAIN: &str = "(define (domain lg)
  (:requirements :strips :typing)
  (:types truck location city package)
  (:predicates (at ?t - truck ?l - location) (pkg-at ?p - package ?l - location) (in-city ?l - location ?c - city))
  (:action drive-truck
    :parameters (?t - truck ?from - location ?to - location ?c - city)
    :precondition (and (at ?t ?from) (in-city ?from ?c) (in-city ?to ?c))
    :effect (and (not (at ?t ?from)) (at ?t ?to))))";

    const PROBLEM: &str = "(define (problem p) (:domain lg)
  (:objects t1 - truck l1 l2 - location c1 - city p1 - package)
  (:init (at t1 l1) (in-city l1 c1) (in-city l2 c1) (pkg-at p1 l1)))";

    fn setup(replies: Vec<&str>) -> (Gateway, DomainModel, ProblemSpec) {
        let d = parse_domain(DOMAIN).unwrap();
        let p = parse_problem(PROBLEM, &d).unwrap();
        let gw = Gateway::new(
            TemplateSet::defaults(),
            Arc::new(ScriptedTransport::new(replies)),
            Clock::Fixed(0),
        );
        (gw, d, p)
    }

    #[test]
    fn canonical_plan_needs_no_calls() {
        let (gw, d, p) = setup(vec![]);
        let (t, calls) = translate_actions("(drive-truck t1 l1 l2 c1)\n", &d, &p, Some(&gw)).unwrap();
        assert_eq!(calls, 0);
        assert_eq!(t, Translation::Plan(Plan::new(vec![PlanStep::new("drive-truck", ["t1", "l1", "l2", "c1"])])));
        let (t, _) = translate_actions("1. Drive-Truck T1 L1 L2 C1.\n", &d, &p, None).unwrap();
        assert!(matches!(t, Translation::Plan(_)));
    }

    #[test]
    fn prose_step_goes_through_translation() {
        let (gw, d, p) = setup(vec!["(drive-truck t1 l1 l2 c1)"]);
        let (t, calls) = translate_actions("drive the truck t1 from l1 to l2 in c1", &d, &p, Some(&gw)).unwrap();
        assert_eq!(calls, 1);
        assert_eq!(t, Translation::Plan(Plan::new(vec![PlanStep::new("drive-truck", ["t1", "l1", "l2", "c1"])])));
    }

    #[test]
    fn missing_argument_is_format_error() {
        let (gw, d, p) = setup(vec!["None"]);
        let (t, _) = translate_actions("(drive-truck t1 l1 l2 c1)\n(drive-truck t1 l2)", &d, &p, Some(&gw)).unwrap();
        assert_eq!(
            t,
            Translation::FormatError {
                step: 2,
                message: "There is an invalid output at step 2. Please strictly follow the output format provided in the example output of each action. Your revised plan:".into()
            }
        );
    }

    #[test]
    fn goal_translation_gate() {
        let (gw, d, p) = setup(vec!["```\n(and (at t1 l2))\n```", "(and (flying t1))"]);
        let instr = Instruction::new("t", "move the truck to l2", p);
        let reg = PredicateRegistry::from_domain(&d);
        let (g, _) = translate_goal(&gw, &instr, &reg, &d, "").unwrap();
        assert_eq!(g, vec![Literal::pos(Atom::new("at", ["t1", "l2"]))]);
        assert!(matches!(
            translate_goal(&gw, &instr, &reg, &d, ""),
            Err(OrchestratorError::UntranslatableGoal { .. })
        ));
    }

    #[test]
    fn loop_succeeds_on_second_round() {
        let (gw, d, p) = setup(vec!["(drive-truck t1 l2 l1 c1)", "(drive-truck t1 l1 l2 c1)"]);
        let mut instr = Instruction::new("t", "move the truck to l2", p);
        instr.goal = Some(vec![Literal::pos(Atom::new("at", ["t1", "l2"]))]);
        let (o, conv) = llm_plan_loop(&gw, &instr, &d, &LoopConfig::default()).unwrap();
        assert_eq!(o.status, LoopStatus::Success);
        assert_eq!(o.rounds, 2);
        assert_eq!(o.feedback_messages, 1);
        assert!(conv.messages()[2]
            .content
            .starts_with("The action at step 1 is not executable due to unmet precondition(s)."));
    }

    #[test]
    fn orderings() {
        let plan = Plan::new(vec![PlanStep::new("heat", ["x"]), PlanStep::new("mash", ["x"])]);
        let ok = OrderingConstraint { first: "heat".into(), then: "(mash x)".into() };
        let bad = OrderingConstraint { first: "mash".into(), then: "heat".into() };
        assert!(check_orderings(&plan, &[ok]).is_empty());
        assert_eq!(check_orderings(&plan, &[bad]).len(), 1);
    }
}
