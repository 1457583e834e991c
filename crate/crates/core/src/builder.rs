//! Action-by-action construction of a domain model: one conversation per
//! action per pass, with a shared predicate registry and automatic
//! feedback rounds for syntax findings.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::audit::{audit_action, render_feedback_with, AuditConfig, Finding, FindingKind};
use crate::llm::{complete, Clock, Conversation, LlmError, Message, Role, Transport};
use crate::pddl::{
    format_action_block, parse_action_block, ActionModel, DomainModel, PddlError, PredicateDef, Provenance, TypeHierarchy,
    ROOT_TYPE,
};
use crate::registry::PredicateRegistry;
use crate::templates::TemplateSet;

/// Feedback rounds per action before giving up on a reply.
pub const MAX_FEEDBACK_ROUNDS: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionDescription {
    pub name: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extra_info: Option<String>,
}

impl ActionDescription {
    pub fn new(name: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            text: text.into(),
            extra_info: None,
        }
    }

    pub fn with_extra(mut self, info: impl Into<String>) -> Self {
        self.extra_info = Some(info.into());
        self
    }
}

/// What construction needs to know about the domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomainBrief {
    pub name: String,
    pub description: String,
    pub types: TypeHierarchy,
    pub actions: Vec<ActionDescription>,
}

#[derive(Debug, thiserror::Error)]
pub enum BuildError {
    #[error("action '{action}': reply still unreadable after {rounds} feedback round(s): {last}")]
    ParseFailureAfterRetries {
        action: String,
        rounds: usize,
        last: PddlError,
    },
    #[error("unknown action '{0}'")]
    UnknownAction(String),
    #[error(transparent)]
    Llm(#[from] LlmError),
}

/// Outcome of constructing one action in one pass.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructedAction {
    pub pass: u32,
    pub action: String,
    pub conversation: String,
    pub model: ActionModel,
    pub new_predicates: Vec<PredicateDef>,
    /// Automatic feedback rounds used.
    pub rounds: usize,
    /// Findings left after the last round; empty when the audit came back clean.
    pub residual: Vec<Finding>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegistrySnapshot {
    pub pass: u32,
    pub action: String,
    pub registry: PredicateRegistry,
}

pub fn conversation_id(action: &str, pass: u32) -> String {
    format!("{action}-pass{pass}")
}

/// Lines describing the type hierarchy for prompts.
pub fn render_types(h: &TypeHierarchy) -> String {
    if h.is_empty() {
        return format!("- {ROOT_TYPE}");
    }
    h.decls()
        .iter()
        .map(|d| {
            if d.parent == ROOT_TYPE {
                format!("- {}", d.name)
            } else {
                format!("- {}: a subtype of {}", d.name, d.parent)
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Construction state: the running registry, every conversation and the
/// history of constructed actions.
pub struct ConstructionSession {
    pub brief: DomainBrief,
    pub templates: TemplateSet,
    pub audit: AuditConfig,
    pub clock: Clock,
    transport: Arc<dyn Transport>,
    pub pass: u32,
    pub registry: PredicateRegistry,
    pub conversations: BTreeMap<String, Conversation>,
    pub history: Vec<ConstructedAction>,
    pub snapshots: Vec<RegistrySnapshot>,
}

impl ConstructionSession {
    pub fn new(brief: DomainBrief, templates: TemplateSet, transport: Arc<dyn Transport>, clock: Clock) -> Self {
        Self {
            brief,
            templates,
            audit: AuditConfig::default(),
            clock,
            transport,
            pass: 1,
            registry: PredicateRegistry::new(),
            conversations: BTreeMap::new(),
            history: Vec::new(),
            snapshots: Vec::new(),
        }
    }

    pub fn transport(&self) -> &dyn Transport {
        self.transport.as_ref()
    }

    pub fn set_transport(&mut self, transport: Arc<dyn Transport>) {
        self.transport = transport;
    }

    /// The construction prompt for `a` under the current registry.
    pub fn construction_prompt(&self, a: &ActionDescription) -> Result<String, LlmError> {
        let demos = self.templates.get("blocksworld-demos").body.clone();
        let extra = match &a.extra_info {
            Some(info) if !info.trim().is_empty() => format!("Additional information from the user:\n{}", info.trim()),
            _ => String::new(),
        };
        let b: BTreeMap<&str, String> = [
            ("demonstrations", demos),
            ("domain_description", self.brief.description.trim().to_string()),
            ("types", render_types(&self.brief.types)),
            ("action_name", a.name.clone()),
            ("action_description", a.text.trim().to_string()),
            ("extra_info", extra),
            ("predicates", self.registry.render_for_prompt()),
        ]
        .into_iter()
        .collect();
        self.templates.render("construct-action", &b)
    }

    /// Latest constructed model for each action, in declaration order.
    pub fn latest(&self, action: &str) -> Option<&ConstructedAction> {
        self.history.iter().rev().find(|c| c.action == action)
    }

    /// Draft domain from the latest model of every action and the registry.
    pub fn draft(&self) -> DomainModel {
        let mut d = DomainModel::new(self.brief.name.clone());
        d.types = self.brief.types.clone();
        d.predicates = self.registry.entries().to_vec();
        for a in &self.brief.actions {
            if let Some(c) = self.latest(&a.name) {
                d.actions.push(c.model.clone());
            }
        }
        d
    }

    /// Writes every conversation that has unsaved messages.
    pub fn persist(&mut self, dir: &Path) -> Result<(), LlmError> {
        for c in self.conversations.values_mut() {
            c.persist(dir)?;
        }
        Ok(())
    }
}

/// Reads the reply at the end of `conv`, feeding parse errors and audit
/// findings back up to [`MAX_FEEDBACK_ROUNDS`] times. Shared by
/// construction and by feedback-driven revision.
pub(crate) struct ReplyLoop<'a> {
    pub templates: &'a TemplateSet,
    pub transport: &'a dyn Transport,
    pub clock: Clock,
    pub audit: AuditConfig,
    pub types: &'a TypeHierarchy,
}

pub(crate) struct LoopResult {
    pub model: ActionModel,
    pub new_predicates: Vec<PredicateDef>,
    pub rounds: usize,
    pub findings: Vec<Finding>,
}

impl ReplyLoop<'_> {
    pub fn run(&self, action: &str, conv: &mut Conversation, reg: &PredicateRegistry) -> Result<LoopResult, BuildError> {
        let mut rounds = 0;
        loop {
            let idx = conv.last_assistant().expect("a reply was requested");
            let reply = &conv.messages()[idx].content;
            let feedback = match parse_action_block(reply) {
                Ok(block) => {
                    let provenance = Provenance::Message {
                        conversation: conv.id.clone(),
                        index: idx,
                    };
                    let (mut model, new_predicates) = block.into_model(action, provenance);
                    model.name = action.to_string();
                    let report = audit_action(&model, &new_predicates, reg, self.types, self.audit);
                    let blocking: Vec<Finding> = report
                        .findings
                        .iter()
                        .filter(|f| f.kind != FindingKind::RedundantPrecondition)
                        .cloned()
                        .collect();
                    if blocking.is_empty() || rounds == MAX_FEEDBACK_ROUNDS {
                        return Ok(LoopResult {
                            model,
                            new_predicates,
                            rounds,
                            findings: report.findings,
                        });
                    }
                    render_feedback_with(&blocking, self.templates)
                }
                Err(e) => {
                    if rounds == MAX_FEEDBACK_ROUNDS {
                        return Err(BuildError::ParseFailureAfterRetries {
                            action: action.to_string(),
                            rounds,
                            last: e,
                        });
                    }
                    self.templates.fill("feedback-parse-error", &[("error", &e.to_string())])
                }
            };
            log::info!("{action}: automatic feedback round {}", rounds + 1);
            conv.push(Role::User, feedback, self.clock);
            complete(conv, self.transport, self.clock)?;
            rounds += 1;
        }
    }
}

/// Prompts for one action with the current registry, runs the automatic
/// feedback rounds and merges the reply's new predicates.
pub fn construct_action(session: &mut ConstructionSession, a: &ActionDescription) -> Result<ConstructedAction, BuildError> {
    let id = conversation_id(&a.name, session.pass);
    let prompt = session.construction_prompt(a)?;
    let mut conv = Conversation::new(id.clone()).tagged([a.name.clone(), format!("pass{}", session.pass)]);
    conv.push(Role::User, prompt, session.clock);
    complete(&mut conv, session.transport.as_ref(), session.clock)?;

    let result = ReplyLoop {
        templates: &session.templates,
        transport: session.transport.as_ref(),
        clock: session.clock,
        audit: session.audit,
        types: &session.brief.types,
    }
    .run(&a.name, &mut conv, &session.registry);
    session.conversations.insert(id.clone(), conv);
    let result = result?;

    merge_predicates(&mut session.registry, &result.new_predicates, &a.name, &session.brief.types);
    for p in result.model.predicates_used() {
        if session.registry.contains(p) {
            session.registry.note_use(p, &a.name);
        }
    }
    let built = ConstructedAction {
        pass: session.pass,
        action: a.name.clone(),
        conversation: id,
        model: result.model,
        new_predicates: result.new_predicates,
        rounds: result.rounds,
        residual: result
            .findings
            .into_iter()
            .filter(|f| f.kind != FindingKind::RedundantPrecondition)
            .collect(),
    };
    session.history.push(built.clone());
    session.snapshots.push(RegistrySnapshot {
        pass: session.pass,
        action: a.name.clone(),
        registry: session.registry.clone(),
    });
    Ok(built)
}

/// Appends genuinely new predicates; collisions come back as findings.
pub fn merge_predicates(
    reg: &mut PredicateRegistry,
    new: &[PredicateDef],
    action: &str,
    h: &TypeHierarchy,
) -> Vec<Finding> {
    reg.merge(new, action, h)
}

/// Two passes over every action in declaration order. The second pass
/// sees the complete registry from the first; its models replace the
/// first pass's wholesale.
pub fn build_domain(session: &mut ConstructionSession) -> Result<(DomainModel, PredicateRegistry), BuildError> {
    let actions = session.brief.actions.clone();
    for pass in 1..=2 {
        session.pass = pass;
        for a in &actions {
            construct_action(session, a)?;
        }
    }
    Ok((session.draft(), session.registry.clone()))
}

/// Answers construction prompts from a reference domain: the reply to a
/// prompt about action `a` is the reference model of `a` with every
/// predicate it uses listed as new. Wrapped in a recording transport, this
/// produces cassettes for fixture projects without a live model.
pub struct ReferenceTransport {
    domain: DomainModel,
}

impl ReferenceTransport {
    pub fn new(domain: DomainModel) -> Self {
        Self { domain }
    }

    /// The action a construction conversation is about: the last
    /// `Action:` line of its opening prompt (earlier ones belong to the
    /// demonstrations).
    pub fn requested_action(messages: &[Message]) -> Option<String> {
        let prompt = messages.iter().find(|m| m.role == Role::User)?;
        prompt
            .content
            .lines()
            .rev()
            .find_map(|l| l.strip_prefix("Action: "))
            .map(|name| name.trim().to_string())
    }
}

impl Transport for ReferenceTransport {
    fn complete(&self, messages: &[Message]) -> Result<String, LlmError> {
        let name = Self::requested_action(messages)
            .ok_or_else(|| LlmError::Transport("prompt names no action".into()))?;
        let model = self
            .domain
            .action(&name)
            .ok_or_else(|| LlmError::Transport(format!("reference domain has no action '{name}'")))?;
        let preds: Vec<PredicateDef> = model
            .predicates_used()
            .into_iter()
            .filter_map(|p| self.domain.predicate(p).cloned())
            .collect();
        let mut model = model.clone();
        model.provenance = Provenance::Handwritten;
        Ok(format_action_block(&model, &preds))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::ScriptedTransport;
    use crate::pddl::{Atom, Literal, Param};

    fn brief(actions: &[&str]) -> DomainBrief {
        DomainBrief {
            name: "blocks".into(),
            description: "A robot arm stacks blocks.".into(),
            types: TypeHierarchy::from_pairs([("block", "object")]).unwrap(),
            actions: actions
                .iter()
                .map(|a| ActionDescription::new(*a, format!("The robot performs {a}.")))
                .collect(),
        }
    }

    fn pick_up() -> (ActionModel, Vec<PredicateDef>) {
        let mut m = ActionModel::new("pick-up");
        m.params.push(Param::new("?x", "block"));
        m.precondition.push(Literal::pos(Atom::new("clear", ["?x"])));
        m.effects.push(Literal::pos(Atom::new("holding", ["?x"])));
        m.effects.push(Literal::neg(Atom::new("clear", ["?x"])));
        let preds = vec![
            PredicateDef::new("clear", vec![Param::new("?x", "block")], "true if ?x has nothing on it"),
            PredicateDef::new("holding", vec![Param::new("?x", "block")], "true if the robot is holding ?x"),
        ];
        (m, preds)
    }

    fn session(actions: &[&str], replies: Vec<String>) -> ConstructionSession {
        ConstructionSession::new(
            brief(actions),
            TemplateSet::defaults(),
            Arc::new(ScriptedTransport::new(replies)),
            Clock::Fixed(0),
        )
    }

    #[test]
    fn well_formed_reply_registers_predicates() {
        let (m, preds) = pick_up();
        let mut s = session(&["pick-up"], vec![format_action_block(&m, &preds)]);
        let a = s.brief.actions[0].clone();
        let c = construct_action(&mut s, &a).unwrap();
        assert_eq!(c.model.precondition, m.precondition);
        assert_eq!(c.model.effects, m.effects);
        assert_eq!(c.rounds, 0);
        assert_eq!(s.registry.len(), 2);
        assert_eq!(s.conversations["pick-up-pass1"].len(), 2);
    }

    #[test]
    fn forall_gets_one_feedback_round() {
        let (m, preds) = pick_up();
        let bad = format_action_block(&m, &preds).replace(
            "    (clear ?x)\n",
            "    (clear ?x)\n    (forall (?y - block) (clear ?y))\n",
        );
        let mut s = session(&["pick-up"], vec![bad, format_action_block(&m, &preds)]);
        let a = s.brief.actions[0].clone();
        let c = construct_action(&mut s, &a).unwrap();
        assert_eq!(c.rounds, 1);
        assert!(c.residual.is_empty());
        let conv = &s.conversations["pick-up-pass1"];
        assert!(conv.messages()[2]
            .content
            .starts_with("The precondition or effect contain the keyword 'forall' that is not supported"));
    }

    #[test]
    fn unreadable_replies_give_up() {
        let mut s = session(&["pick-up"], vec!["no sections here".to_string(); 4]);
        let a = s.brief.actions[0].clone();
        let err = construct_action(&mut s, &a).unwrap_err();
        assert!(matches!(err, BuildError::ParseFailureAfterRetries { rounds: 3, .. }));
    }

    #[test]
    fn single_action_still_runs_second_pass() {
        let (m, preds) = pick_up();
        let reply = format_action_block(&m, &preds);
        let mut s = session(&["pick-up"], vec![reply.clone(), reply]);
        let (d, reg) = build_domain(&mut s).unwrap();
        assert_eq!(s.history.len(), 2);
        assert_eq!(s.history[1].pass, 2);
        assert_eq!(reg.len(), 2);
        assert_eq!(d.actions.len(), 1);
        assert!(s.conversations.contains_key("pick-up-pass2"));
        // pass 2 prompt lists the registry built in pass 1
        let p2 = &s.conversations["pick-up-pass2"].messages()[0].content;
        assert!(p2.contains("- (holding ?x - block): true if the robot is holding ?x"));
    }
}
