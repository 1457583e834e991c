//! Feedback-driven revision of action models. Feedback from the auditor,
//! a human or a failed plan is appended to the action's construction
//! conversation, the reply is re-read, and the change is recorded.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::audit::{audit_action, AuditConfig, AuditReport, Finding, FindingKind};
use crate::builder::{merge_predicates, BuildError, ReplyLoop};
use crate::llm::{complete, Clock, Conversation, Role, Transport};
use crate::pddl::{print_action, ActionModel, DomainModel, Provenance};
use crate::registry::PredicateRegistry;
use crate::templates::TemplateSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeedbackSource {
    Auditor,
    Human,
    PlanValidation,
}

impl FeedbackSource {
    pub fn as_str(self) -> &'static str {
        match self {
            FeedbackSource::Auditor => "auditor",
            FeedbackSource::Human => "human",
            FeedbackSource::PlanValidation => "plan-validation",
        }
    }
}

/// One feedback message as stored in the event log. Events are never
/// rewritten; whether an issue ended up resolved is derived from the log.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FeedbackEvent {
    pub seq: usize,
    pub source: FeedbackSource,
    pub target_action: String,
    pub text: String,
    /// Identifies the problem the feedback is about. Repeating a key on the
    /// same action means the earlier attempt did not fix it.
    pub issue: String,
    pub revision: usize,
    /// The revision changed the model and, for auditor feedback, removed
    /// the targeted finding.
    pub fixed: bool,
    pub introduced_new_errors: bool,
    pub timestamp: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiffOp {
    #[serde(rename = " ")]
    Keep,
    #[serde(rename = "+")]
    Add,
    #[serde(rename = "-")]
    Remove,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffLine {
    pub op: DiffOp,
    pub text: String,
}

/// Line diff by longest common subsequence.
pub fn diff_lines(before: &str, after: &str) -> Vec<DiffLine> {
    let a: Vec<&str> = before.lines().collect();
    let b: Vec<&str> = after.lines().collect();
    let (n, m) = (a.len(), b.len());
    let mut lcs = vec![vec![0u32; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            lcs[i][j] = if a[i] == b[j] {
                lcs[i + 1][j + 1] + 1
            } else {
                lcs[i + 1][j].max(lcs[i][j + 1])
            };
        }
    }
    let line = |op, text: &str| DiffLine { op, text: text.to_string() };
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < n && j < m {
        if a[i] == b[j] {
            out.push(line(DiffOp::Keep, a[i]));
            i += 1;
            j += 1;
        } else if lcs[i + 1][j] >= lcs[i][j + 1] {
            out.push(line(DiffOp::Remove, a[i]));
            i += 1;
        } else {
            out.push(line(DiffOp::Add, b[j]));
            j += 1;
        }
    }
    out.extend(a[i..].iter().map(|t| line(DiffOp::Remove, t)));
    out.extend(b[j..].iter().map(|t| line(DiffOp::Add, t)));
    out
}

pub fn render_diff(diff: &[DiffLine]) -> String {
    let mut out = String::new();
    for l in diff {
        let sign = match l.op {
            DiffOp::Keep => ' ',
            DiffOp::Add => '+',
            DiffOp::Remove => '-',
        };
        out.push(sign);
        out.push_str(&l.text);
        out.push('\n');
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelRevision {
    pub id: usize,
    pub action: String,
    pub before: ActionModel,
    pub after: ActionModel,
    pub diff: Vec<DiffLine>,
    pub added: usize,
    pub removed: usize,
    pub audit: AuditReport,
}

impl ModelRevision {
    pub fn new(id: usize, before: ActionModel, after: ActionModel, audit: AuditReport) -> Self {
        let text = |m: &ActionModel| {
            let mut m = m.clone();
            m.provenance = Provenance::Handwritten;
            print_action(&m, 0)
        };
        let diff = diff_lines(&text(&before), &text(&after));
        let added = diff.iter().filter(|l| l.op == DiffOp::Add).count();
        let removed = diff.iter().filter(|l| l.op == DiffOp::Remove).count();
        Self {
            id,
            action: after.name.clone(),
            before,
            after,
            diff,
            added,
            removed,
            audit,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.added == 0 && self.removed == 0
    }
}

/// Stable key of a finding for issue tracking.
pub fn finding_key(f: &Finding) -> String {
    format!("{}:{}", f.kind.as_str(), f.locus.snippet)
}

#[derive(Debug, thiserror::Error)]
pub enum CorrectionError {
    #[error("unknown action '{0}'")]
    UnknownAction(String),
    #[error("action '{0}' has no construction conversation")]
    NoConversation(String),
    #[error("feedback text is empty")]
    EmptyFeedback,
    #[error(transparent)]
    Build(#[from] BuildError),
}

/// A feedback request before it is applied.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Feedback {
    pub source: FeedbackSource,
    pub text: String,
    pub issue: Option<String>,
}

impl Feedback {
    pub fn human(text: impl Into<String>) -> Self {
        Self {
            source: FeedbackSource::Human,
            text: text.into(),
            issue: None,
        }
    }

    pub fn from_finding(f: &Finding) -> Self {
        Self {
            source: FeedbackSource::Auditor,
            text: f.message.clone(),
            issue: Some(finding_key(f)),
        }
    }

    pub fn plan_validation(text: impl Into<String>) -> Self {
        Self {
            source: FeedbackSource::PlanValidation,
            text: text.into(),
            issue: None,
        }
    }

    pub fn with_issue(mut self, issue: impl Into<String>) -> Self {
        self.issue = Some(issue.into());
        self
    }
}

pub struct CorrectionSession {
    pub domain: DomainModel,
    pub registry: PredicateRegistry,
    pub conversations: BTreeMap<String, Conversation>,
    pub events: Vec<FeedbackEvent>,
    pub revisions: Vec<ModelRevision>,
    pub templates: TemplateSet,
    pub audit: AuditConfig,
    pub clock: Clock,
    transport: Arc<dyn Transport>,
}

impl CorrectionSession {
    pub fn new(
        domain: DomainModel,
        registry: PredicateRegistry,
        conversations: BTreeMap<String, Conversation>,
        templates: TemplateSet,
        transport: Arc<dyn Transport>,
        clock: Clock,
    ) -> Self {
        Self {
            domain,
            registry,
            conversations,
            events: Vec::new(),
            revisions: Vec::new(),
            templates,
            audit: AuditConfig::default(),
            clock,
            transport,
        }
    }

    pub fn set_transport(&mut self, transport: Arc<dyn Transport>) {
        self.transport = transport;
    }

    /// Conversation holding the action's current model: the one named in
    /// its provenance, else the latest conversation tagged with the action.
    pub fn conversation_for(&self, action: &str) -> Option<&str> {
        let m = self.domain.action(action)?;
        if let Provenance::Message { conversation, .. } = &m.provenance {
            if self.conversations.contains_key(conversation) {
                return Some(conversation);
            }
        }
        self.conversations
            .values()
            .filter(|c| c.tags.first().is_some_and(|t| t == action))
            .max_by_key(|c| c.tags.get(1).cloned())
            .map(|c| c.id.as_str())
    }

    pub fn audit_action(&self, action: &str) -> Option<AuditReport> {
        let m = self.domain.action(action)?;
        Some(audit_action(m, &[], &self.registry, &self.domain.types, self.audit))
    }

    pub fn revisions_of<'a>(&'a self, action: &'a str) -> impl Iterator<Item = &'a ModelRevision> {
        self.revisions.iter().filter(move |r| r.action == action)
    }

    pub fn events_of<'a>(&'a self, action: &'a str) -> impl Iterator<Item = &'a FeedbackEvent> {
        self.events.iter().filter(move |e| e.target_action == action)
    }
}

fn blocking_keys(r: &AuditReport) -> BTreeSet<String> {
    r.findings
        .iter()
        .filter(|f| f.kind != FindingKind::RedundantPrecondition)
        .map(finding_key)
        .collect()
}

/// Appends `fb` to the action's conversation, reads the reply (with
/// automatic rounds for syntax findings), and records the revision.
pub fn apply_feedback(
    s: &mut CorrectionSession,
    action: &str,
    fb: Feedback,
) -> Result<(FeedbackEvent, ModelRevision), CorrectionError> {
    if fb.text.trim().is_empty() {
        return Err(CorrectionError::EmptyFeedback);
    }
    let before = s
        .domain
        .action(action)
        .cloned()
        .ok_or_else(|| CorrectionError::UnknownAction(action.to_string()))?;
    let conv_id = s
        .conversation_for(action)
        .ok_or_else(|| CorrectionError::NoConversation(action.to_string()))?
        .to_string();
    let before_audit = audit_action(&before, &[], &s.registry, &s.domain.types, s.audit);

    let mut conv = s.conversations.remove(&conv_id).expect("looked up above");
    conv.push(Role::User, fb.text.clone(), s.clock);
    let result = complete(&mut conv, s.transport.as_ref(), s.clock)
        .map_err(BuildError::from)
        .and_then(|_| {
            ReplyLoop {
                templates: &s.templates,
                transport: s.transport.as_ref(),
                clock: s.clock,
                audit: s.audit,
                types: &s.domain.types,
            }
            .run(action, &mut conv, &s.registry)
        });
    s.conversations.insert(conv_id, conv);
    let result = result?;

    merge_predicates(&mut s.registry, &result.new_predicates, action, &s.domain.types);
    for p in result.model.predicates_used() {
        if s.registry.contains(p) {
            s.registry.note_use(p, action);
        }
    }
    s.domain.predicates = s.registry.entries().to_vec();
    let after = result.model;
    *s.domain.action_mut(action).expect("checked above") = after.clone();

    let after_audit = audit_action(&after, &[], &s.registry, &s.domain.types, s.audit);
    let revision = ModelRevision::new(s.revisions.len(), before, after, after_audit.clone());

    let seq = s.events.len();
    let issue = fb.issue.unwrap_or_else(|| format!("{}#{seq}", fb.source.as_str()));
    let after_keys = blocking_keys(&after_audit);
    let before_keys = blocking_keys(&before_audit);
    let fixed = match fb.source {
        FeedbackSource::Auditor => !after_keys.contains(&issue),
        _ => !revision.is_empty(),
    };
    let event = FeedbackEvent {
        seq,
        source: fb.source,
        target_action: action.to_string(),
        text: fb.text,
        issue,
        revision: revision.id,
        fixed,
        introduced_new_errors: !after_keys.is_subset(&before_keys),
        timestamp: s.clock.now(),
    };
    s.events.push(event.clone());
    s.revisions.push(revision.clone());
    Ok((event, revision))
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceCounts {
    pub auditor: usize,
    pub human: usize,
    #[serde(rename = "planValidation")]
    pub plan_validation: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FeedbackLedger {
    pub per_action: BTreeMap<String, SourceCounts>,
    pub total_human_messages: usize,
    pub errors_resolved: usize,
    pub extra_rounds: usize,
}

/// Counts derived from the event log alone. An issue is resolved when its
/// last event fixed it; an event is an extra round when the previous event
/// on the same action and issue did not fix it.
pub fn feedback_ledger(events: &[FeedbackEvent]) -> FeedbackLedger {
    let mut ledger = FeedbackLedger::default();
    let mut last: BTreeMap<(&str, &str), &FeedbackEvent> = BTreeMap::new();
    for e in events {
        let c = ledger.per_action.entry(e.target_action.clone()).or_default();
        match e.source {
            FeedbackSource::Auditor => c.auditor += 1,
            FeedbackSource::Human => c.human += 1,
            FeedbackSource::PlanValidation => c.plan_validation += 1,
        }
        let key = (e.target_action.as_str(), e.issue.as_str());
        if last.get(&key).is_some_and(|prev| !prev.fixed) {
            ledger.extra_rounds += 1;
        }
        last.insert(key, e);
    }
    ledger.total_human_messages = ledger.per_action.values().map(|c| c.human).sum();
    ledger.errors_resolved = last.values().filter(|e| e.fixed).count();
    ledger
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::ScriptedTransport;
    use crate::pddl::{format_action_block, Atom, Literal, Param, PredicateDef, TypeHierarchy};

    #[test]
    fn lcs_diff() {
        let d = diff_lines("a\nb\nc\n", "a\nx\nc\nd\n");
        assert_eq!(render_diff(&d), " a\n-b\n+x\n c\n+d\n");
        assert!(diff_lines("same\n", "same\n").iter().all(|l| l.op == DiffOp::Keep));
    }

    fn event(action: &str, source: FeedbackSource, issue: &str, fixed: bool) -> FeedbackEvent {
        FeedbackEvent {
            seq: 0,
            source,
            target_action: action.into(),
            text: "x".into(),
            issue: issue.into(),
            revision: 0,
            fixed,
            introduced_new_errors: false,
            timestamp: 0,
        }
    }

    #[test]
    fn ledger_counts() {
        assert_eq!(feedback_ledger(&[]), FeedbackLedger::default());
        let events = vec![
            event("open", FeedbackSource::Human, "a", false),
            event("open", FeedbackSource::Human, "a", true),
            event("close", FeedbackSource::Auditor, "b", true),
        ];
        let l = feedback_ledger(&events);
        assert_eq!(l.extra_rounds, 1);
        assert_eq!(l.total_human_messages, 2);
        assert_eq!(l.errors_resolved, 2);
        assert_eq!(l.per_action["close"].auditor, 1);
    }

    #[test]
    fn identical_reply_gives_empty_revision() {
        let h = TypeHierarchy::from_pairs([("block", "object")]).unwrap();
        let mut m = ActionModel::new("touch");
        m.params.push(Param::new("?x", "block"));
        m.effects.push(Literal::pos(Atom::new("touched", ["?x"])));
        let preds = vec![PredicateDef::new("touched", vec![Param::new("?x", "block")], "true if ?x was touched")];
        let reply = format_action_block(&m, &preds);

        let mut conv = Conversation::new("touch-pass2").tagged(["touch", "pass2"]);
        conv.push(Role::User, "construct touch", Clock::Fixed(0));
        conv.push(Role::Assistant, reply.clone(), Clock::Fixed(0));
        m.provenance = Provenance::Message {
            conversation: "touch-pass2".into(),
            index: 1,
        };
        let mut d = DomainModel::new("t");
        d.types = h.clone();
        d.predicates = preds.clone();
        d.actions.push(m);
        let mut reg = PredicateRegistry::new();
        reg.merge(&preds, "touch", &h);
        let mut s = CorrectionSession::new(
            d,
            reg,
            [("touch-pass2".to_string(), conv)].into_iter().collect(),
            TemplateSet::defaults(),
            Arc::new(ScriptedTransport::new([reply])),
            Clock::Fixed(0),
        );
        let (e, r) = apply_feedback(&mut s, "touch", Feedback::human("looks fine?")).unwrap();
        assert!(r.is_empty());
        assert!(!e.fixed);
        assert_eq!(s.conversations["touch-pass2"].len(), 4);
        assert_eq!(
            s.domain.action("touch").unwrap().provenance,
            Provenance::Message {
                conversation: "touch-pass2".into(),
                index: 3
            }
        );
    }
}
