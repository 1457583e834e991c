//! Plain-text forms of the service payloads for terminal output.

use std::fmt::Write;

use pddlforge::audit::AuditReport;
use pddlforge::correction::render_diff;
use pddlforge::orchestrator::LoopOutcome;
use pddlforge::pddl::print_plan;
use pddlforge::planner::Outcome;
use pddlforge::state::{Localization, ValidationReport};

use crate::service::{ActionDetail, ConstructResponse, FeedbackResponse, PlanResponse, Report, SuiteResponse};

fn literals<T: ToString>(out: &mut String, items: &[T]) {
    for l in items {
        let _ = writeln!(out, "  {}", l.to_string());
    }
}

pub fn plan(r: &PlanResponse) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "task {}", r.task);
    let _ = writeln!(out, "goal:");
    literals(&mut out, &r.goal);
    match &r.result.outcome {
        Outcome::Plan(p) => {
            let _ = writeln!(out, "plan ({} steps):", p.len());
            out.push_str(&print_plan(p));
        }
        Outcome::Unsolvable => out.push_str("no plan: the goal is unreachable\n"),
        Outcome::ResourceLimit { reason } => {
            let _ = writeln!(out, "no plan: {reason}");
        }
    }
    let s = &r.result.stats;
    let _ = writeln!(
        out,
        "{} ground actions, {} expanded, {} generated, {} ms",
        s.ground_actions, s.expansions, s.generated, s.wall_ms
    );
    out
}

pub fn validation(v: &ValidationReport) -> String {
    if v.is_valid() {
        return "valid\n".into();
    }
    let mut out = String::from("invalid\n");
    for f in &v.failures {
        match f.step {
            Some(step) => {
                let _ = writeln!(out, "step {step}: {}", f.kind.as_str());
            }
            None => {
                let _ = writeln!(out, "goal: {}", f.kind.as_str());
            }
        }
        literals(&mut out, &f.unmet);
        if let Some(d) = &f.detail {
            let _ = writeln!(out, "  {d}");
        }
    }
    if !v.not_evaluated.is_empty() {
        let steps: Vec<String> = v.not_evaluated.iter().map(|s| s.to_string()).collect();
        let _ = writeln!(out, "not evaluated: steps {}", steps.join(", "));
    }
    out
}

pub fn localization(l: &Localization) -> String {
    let Some(kind) = l.kind else {
        return "every step executes and the goal holds\n".into();
    };
    let mut out = String::new();
    match l.failing_step {
        Some(step) => {
            let _ = writeln!(out, "first failing step: {step} ({})", kind.as_str());
        }
        None => {
            let _ = writeln!(out, "every step executes but the goal is not reached");
        }
    }
    literals(&mut out, &l.unmet);
    let _ = writeln!(out, "suspect actions: {}", l.suspect_actions.join(", "));
    out
}

pub fn audit(r: &AuditReport) -> String {
    if r.clean {
        return "clean\n".into();
    }
    let mut out = String::new();
    for f in &r.findings {
        let at = f.locus.action.as_deref().unwrap_or("predicates");
        let _ = writeln!(out, "[{}] {at} ({})", f.kind.as_str(), f.locus.section);
        for line in f.message.lines() {
            let _ = writeln!(out, "  {line}");
        }
    }
    let _ = writeln!(out, "{} finding(s)", r.findings.len());
    out
}

pub fn action(d: &ActionDetail) -> String {
    let mut out = String::new();
    match (&d.nl, &d.nl_error) {
        (Some(nl), _) => out.push_str(nl),
        (None, Some(e)) => {
            let _ = writeln!(out, "(no natural-language rendering: {e})");
            out.push_str(&d.pddl);
        }
        (None, None) => out.push_str(&d.pddl),
    }
    if !out.ends_with('\n') {
        out.push('\n');
    }
    let _ = writeln!(out, "revisions: {}", d.revisions.len());
    out.push_str(&audit(&d.audit));
    out
}

pub fn feedback(r: &FeedbackResponse) -> String {
    let mut out = String::new();
    let e = &r.event;
    let _ = writeln!(
        out,
        "revision {} of {} ({} feedback, {})",
        r.revision.id,
        e.target_action,
        e.source.as_str(),
        if e.fixed { "fixed" } else { "not fixed" }
    );
    if r.revision.is_empty() {
        out.push_str("model unchanged\n");
    } else {
        out.push_str(&render_diff(&r.revision.diff));
    }
    if e.introduced_new_errors {
        out.push_str("warning: the revision introduced new findings\n");
    }
    out.push_str(&audit(&r.audit));
    out
}

pub fn llm_loop(o: &LoopOutcome) -> String {
    let status = serde_json::to_value(o.status).expect("enum serializes");
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} after {} round(s), {} feedback message(s)",
        status.as_str().unwrap_or_default(),
        o.rounds,
        o.feedback_messages
    );
    if o.duplicate_plan {
        out.push_str("the planner repeated a rejected plan\n");
    }
    if let Some(e) = &o.error {
        let _ = writeln!(out, "{e}");
    }
    if let Some(p) = &o.plan {
        out.push_str(&print_plan(p));
    }
    for v in &o.ordering_violations {
        let _ = writeln!(out, "ordering violated: {v}");
    }
    let _ = writeln!(out, "transcript: runs/{}.jsonl", o.transcript);
    out
}

pub fn suite(r: &SuiteResponse) -> String {
    let mut out = String::new();
    for run in &r.runs {
        let steps = run.plan.as_ref().map(|p| format!(" ({} steps)", p.len())).unwrap_or_default();
        let _ = writeln!(out, "{:<16} {}{steps}", run.task_id, run.outcome);
    }
    let _ = writeln!(out, "{}: {}/{} solved", r.mode, r.solved, r.total);
    out
}

pub fn construct(r: &ConstructResponse) -> String {
    let mut out = String::new();
    for a in &r.actions {
        let _ = writeln!(
            out,
            "{:<20} pass {}, {} feedback round(s), {} residual finding(s)",
            a.name, a.pass, a.rounds, a.residual
        );
    }
    let _ = writeln!(
        out,
        "{} actions, {} predicates, {} messages",
        r.actions.len(),
        r.predicates,
        r.messages
    );
    out
}

pub fn report(r: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "project {}: {} actions, {} predicates, {} construction messages",
        r.project, r.actions, r.predicates, r.construction_messages
    );
    out.push_str("\nfeedback\n");
    let _ = writeln!(out, "  {:<20} {:>7} {:>7} {:>15}", "action", "auditor", "human", "plan-validation");
    for (action, c) in &r.ledger.per_action {
        let _ = writeln!(out, "  {action:<20} {:>7} {:>7} {:>15}", c.auditor, c.human, c.plan_validation);
    }
    let _ = writeln!(out, "  human messages: {}", r.ledger.total_human_messages);
    let _ = writeln!(out, "  errors resolved: {}", r.ledger.errors_resolved);
    let _ = writeln!(out, "  extra rounds: {}", r.ledger.extra_rounds);
    out.push_str("\nplanning\n");
    if r.runs.is_empty() {
        out.push_str("  no runs yet\n");
    }
    for s in &r.runs {
        let rate = if s.total == 0 { 0.0 } else { 100.0 * s.solved as f64 / s.total as f64 };
        let _ = writeln!(
            out,
            "  {}: {}/{} solved ({rate:.1}%), mean rounds {:.2}",
            s.mode, s.solved, s.total, s.mean_rounds
        );
    }
    out
}
