//! Operations shared by the command line and the HTTP API. Each returns a
//! serializable payload or an [`ApiError`], so both front ends emit the same
//! records for the same request.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{Duration, Instant};

use pddlforge::audit::{audit_domain, AuditReport, FindingKind};
use pddlforge::builder::BuildError;
use pddlforge::correction::{apply_feedback, feedback_ledger, CorrectionError, Feedback, FeedbackEvent, FeedbackLedger, FeedbackSource, ModelRevision};
use pddlforge::llm::{LlmError, Transport};
use pddlforge::nl::render_model_nl;
use pddlforge::orchestrator::{classical_pipeline, llm_plan_loop, Gateway, Instruction, LoopOutcome, OrchestratorError, RunRecord};
use pddlforge::pddl::{parse_domain_with, parse_goal, parse_plan, parse_problem, print_action, DomainModel, ParseMode, PddlError, ProblemSpec};
use pddlforge::planner::{PlanResult, PlannerError};
use pddlforge::registry::PredicateRegistry;
use pddlforge::state::{localize_error, validate_plan, Localization, ValidationReport};
use pddlforge::workspace::{Project, WorkspaceError, DOMAIN_FILE, DRAFT_FILE, REGISTRY_FILE};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Error payload of every failed operation. `code` is stable; the HTTP
/// status is a function of it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, thiserror::Error)]
#[error("{message}")]
pub struct ApiError {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
}

impl ApiError {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        Self {
            code: code.to_string(),
            message: message.into(),
            detail: None,
        }
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.detail = Some(detail);
        self
    }

    pub fn status(&self) -> u16 {
        match self.code.as_str() {
            "not-a-project" | "unknown-action" | "unknown-task" | "not-found" => 404,
            "revision-in-flight" | "locked" | "no-domain" | "already-constructed" | "already-initialized"
            | "no-conversation" | "schema-version" => 409,
            "invalid-payload" | "invalid-plan" | "invalid-problem" | "invalid-goal" | "missing-problem"
            | "missing-instruction" | "empty-feedback" | "no-findings" | "untranslatable-goal"
            | "grounding-explosion" => 422,
            "llm-error" | "unreadable-reply" => 502,
            _ => 500,
        }
    }
}

impl From<WorkspaceError> for ApiError {
    fn from(e: WorkspaceError) -> Self {
        let code = match &e {
            WorkspaceError::SchemaVersionMismatch { .. } => "schema-version",
            WorkspaceError::CorruptArtifact { .. } => "corrupt-artifact",
            WorkspaceError::NotAProject(_) => "not-a-project",
            WorkspaceError::AlreadyInitialized(_) => "already-initialized",
            WorkspaceError::Locked(_) => "locked",
            WorkspaceError::Inconsistent(_) => "inconsistent",
            WorkspaceError::NoDomain => "no-domain",
            WorkspaceError::AlreadyConstructed => "already-constructed",
            WorkspaceError::Build(b) => return b.into_api(),
            WorkspaceError::Llm(_) => "llm-error",
            WorkspaceError::Io(_) => "io",
        };
        ApiError::new(code, e.to_string())
    }
}

trait IntoApi {
    fn into_api(self) -> ApiError;
}

impl IntoApi for &BuildError {
    fn into_api(self) -> ApiError {
        let code = match self {
            BuildError::ParseFailureAfterRetries { .. } => "unreadable-reply",
            BuildError::UnknownAction(_) => "unknown-action",
            BuildError::Llm(_) => "llm-error",
        };
        ApiError::new(code, self.to_string())
    }
}

impl From<LlmError> for ApiError {
    fn from(e: LlmError) -> Self {
        ApiError::new("llm-error", e.to_string())
    }
}

impl From<CorrectionError> for ApiError {
    fn from(e: CorrectionError) -> Self {
        let code = match &e {
            CorrectionError::UnknownAction(_) => "unknown-action",
            CorrectionError::NoConversation(_) => "no-conversation",
            CorrectionError::EmptyFeedback => "empty-feedback",
            CorrectionError::Build(b) => return b.into_api(),
        };
        ApiError::new(code, e.to_string())
    }
}

impl From<OrchestratorError> for ApiError {
    fn from(e: OrchestratorError) -> Self {
        match e {
            OrchestratorError::UntranslatableGoal { reply, violation } => {
                ApiError::new("untranslatable-goal", format!("goal translation rejected: {violation}"))
                    .with_detail(json!({ "reply": reply, "violation": violation }))
            }
            OrchestratorError::Planner(p) => p.into(),
            OrchestratorError::Llm(l) => l.into(),
        }
    }
}

impl From<PlannerError> for ApiError {
    fn from(e: PlannerError) -> Self {
        let code = match &e {
            PlannerError::GroundingExplosion { .. } => "grounding-explosion",
            _ => "planner-error",
        };
        ApiError::new(code, e.to_string())
    }
}

impl From<std::io::Error> for ApiError {
    fn from(e: std::io::Error) -> Self {
        ApiError::new("io", e.to_string())
    }
}

fn pddl_error(code: &str, e: PddlError) -> ApiError {
    ApiError::new(code, e.to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChangeKind {
    Construct,
    Revision,
    Run,
}

/// One entry of the change feed the console polls.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Change {
    pub seq: u64,
    pub kind: ChangeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub revision: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ChangePage {
    /// Sequence number of the newest change; pass it back as `since`.
    pub latest: u64,
    pub changes: Vec<Change>,
}

/// In-memory change log of one service instance. Sequence numbers start
/// at 1, so `since = 0` means "everything".
#[derive(Debug, Default)]
pub struct ChangeFeed {
    log: Mutex<Vec<Change>>,
    notify: tokio::sync::Notify,
}

impl ChangeFeed {
    fn push(&self, kind: ChangeKind, action: Option<&str>, task: Option<&str>, revision: Option<usize>) {
        let mut log = relock(&self.log);
        let seq = log.len() as u64 + 1;
        log.push(Change {
            seq,
            kind,
            action: action.map(str::to_string),
            task: task.map(str::to_string),
            revision,
        });
        drop(log);
        self.notify.notify_waiters();
    }

    pub fn since(&self, since: u64) -> ChangePage {
        let log = relock(&self.log);
        let start = (since as usize).min(log.len());
        ChangePage {
            latest: log.len() as u64,
            changes: log[start..].to_vec(),
        }
    }

    /// Returns as soon as a change newer than `since` exists, or with an
    /// empty page once `timeout` has passed.
    pub async fn wait(&self, since: u64, timeout: Duration) -> ChangePage {
        let deadline = tokio::time::Instant::now() + timeout;
        loop {
            let notified = self.notify.notified();
            tokio::pin!(notified);
            notified.as_mut().enable();
            let page = self.since(since);
            if !page.changes.is_empty() {
                return page;
            }
            if tokio::time::timeout_at(deadline, notified).await.is_err() {
                return self.since(since);
            }
        }
    }
}

fn relock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProjectSummary {
    pub name: String,
    pub description: String,
    pub transport: String,
    pub has_domain: bool,
    pub corrected: bool,
    pub actions: usize,
    pub predicates: usize,
    pub tasks: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ActionSummary {
    pub name: String,
    pub clean: bool,
    pub findings: usize,
    pub revisions: usize,
    pub in_flight: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ActionDetail {
    pub name: String,
    pub pddl: String,
    /// Natural-language rendering; absent when a predicate lacks a
    /// description, in which case `nl_error` says which.
    pub nl: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nl_error: Option<String>,
    pub audit: AuditReport,
    pub revisions: Vec<ModelRevision>,
    pub events: Vec<FeedbackEvent>,
    pub in_flight: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase", deny_unknown_fields)]
pub struct FeedbackRequest {
    pub text: Option<String>,
    pub source: Option<FeedbackSource>,
    /// Issue key; repeating one marks a follow-up on an unfixed problem.
    pub issue: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FeedbackResponse {
    pub event: FeedbackEvent,
    pub revision: ModelRevision,
    pub audit: AuditReport,
}

/// Where a request's objects and initial state come from: a suite task id
/// or inline problem PDDL.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase", deny_unknown_fields)]
pub struct ValidateRequest {
    pub plan: String,
    pub task: Option<String>,
    pub problem: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase", deny_unknown_fields)]
pub struct PlanRequest {
    pub instruction: Option<String>,
    pub task: Option<String>,
    pub problem: Option<String>,
    /// PDDL goal used instead of translating the instruction.
    pub goal: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PlanResponse {
    pub task: String,
    pub goal: Vec<String>,
    pub result: PlanResult,
    /// Re-validation of the returned plan; absent when there is none.
    pub validation: Option<ValidationReport>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SuiteResponse {
    pub mode: String,
    pub solved: usize,
    pub total: usize,
    pub runs: Vec<RunRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConstructedSummary {
    pub name: String,
    pub pass: u32,
    pub rounds: usize,
    pub residual: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConstructResponse {
    pub actions: Vec<ConstructedSummary>,
    pub predicates: usize,
    pub messages: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunSummary {
    pub mode: String,
    pub solved: usize,
    pub total: usize,
    pub mean_rounds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub project: String,
    pub actions: usize,
    pub predicates: usize,
    pub construction_messages: usize,
    pub ledger: FeedbackLedger,
    /// Latest run per task, grouped by mode.
    pub runs: Vec<RunSummary>,
}

/// Removes the action from the in-flight set when the revision ends.
struct InFlight<'a> {
    set: &'a Mutex<BTreeSet<String>>,
    action: String,
}

impl Drop for InFlight<'_> {
    fn drop(&mut self) {
        relock(self.set).remove(&self.action);
    }
}

/// A project directory plus the state a long-running server needs: the
/// writer lock, actions under revision and the change feed.
pub struct Service {
    root: PathBuf,
    transport: Option<Arc<dyn Transport>>,
    writer: Mutex<()>,
    in_flight: Mutex<BTreeSet<String>>,
    pub feed: ChangeFeed,
}

impl Service {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self {
            root: root.into(),
            transport: None,
            writer: Mutex::new(()),
            in_flight: Mutex::new(BTreeSet::new()),
            feed: ChangeFeed::default(),
        }
    }

    /// Uses `t` for every model call instead of the configured transport.
    pub fn with_transport(mut self, t: Arc<dyn Transport>) -> Self {
        self.transport = Some(t);
        self
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn project(&self) -> Result<Project, ApiError> {
        Ok(Project::load(&self.root)?)
    }

    fn transport_for(&self, p: &Project) -> Result<Arc<dyn Transport>, ApiError> {
        match &self.transport {
            Some(t) => Ok(t.clone()),
            None => Ok(p.transport()?),
        }
    }

    fn gateway(&self, p: &Project) -> Result<Gateway, ApiError> {
        Ok(Gateway::new(p.templates.clone(), self.transport_for(p)?, p.config.clock()))
    }

    fn registry(p: &Project, d: &DomainModel) -> Result<PredicateRegistry, ApiError> {
        if p.path(REGISTRY_FILE).exists() {
            Ok(p.load_registry()?)
        } else {
            Ok(PredicateRegistry::from_domain(d))
        }
    }

    fn is_in_flight(&self, action: &str) -> bool {
        relock(&self.in_flight).contains(action)
    }

    pub fn summary(&self) -> Result<ProjectSummary, ApiError> {
        let p = self.project()?;
        let d = p.load_domain()?;
        let transport = serde_json::to_value(&p.config.transport).expect("mode serializes");
        Ok(ProjectSummary {
            name: p.config.name.clone(),
            description: p.config.description.clone(),
            transport: transport["mode"].as_str().unwrap_or_default().to_string(),
            has_domain: d.is_some(),
            corrected: p.path(DOMAIN_FILE).exists(),
            actions: d.as_ref().map_or(0, |d| d.actions.len()),
            predicates: d.as_ref().map_or(0, |d| d.predicates.len()),
            tasks: p.load_suite()?.len(),
        })
    }

    /// Two-pass construction through the configured transport.
    pub fn construct(&self, force: bool) -> Result<ConstructResponse, ApiError> {
        let _w = relock(&self.writer);
        let p = self.project()?;
        let _lock = p.lock()?;
        let s = p.construct(self.transport_for(&p)?, force)?;
        let mut actions: BTreeMap<&str, ConstructedSummary> = BTreeMap::new();
        for h in &s.history {
            actions.insert(
                &h.action,
                ConstructedSummary {
                    name: h.action.clone(),
                    pass: h.pass,
                    rounds: h.rounds,
                    residual: h.residual.len(),
                },
            );
        }
        let order = p.config.actions.iter().filter_map(|a| actions.get(a.name.as_str()).cloned());
        let out = ConstructResponse {
            actions: order.collect(),
            predicates: s.registry.len(),
            messages: s.conversations.values().map(|c| c.len()).sum(),
        };
        self.feed.push(ChangeKind::Construct, None, None, None);
        Ok(out)
    }

    /// Audits the current domain. The file is read leniently so that
    /// unsupported constructs become findings rather than load errors.
    pub fn audit(&self) -> Result<AuditReport, ApiError> {
        let p = self.project()?;
        let d = self.lenient_domain(&p)?.ok_or_else(|| ApiError::from(WorkspaceError::NoDomain))?;
        Ok(audit_domain(&d, p.config.audit))
    }

    fn lenient_domain(&self, p: &Project) -> Result<Option<DomainModel>, ApiError> {
        for file in [DOMAIN_FILE, DRAFT_FILE] {
            let path = p.path(file);
            if path.exists() {
                return audit_file(&path).map(Some);
            }
        }
        Ok(None)
    }

    pub fn list_actions(&self) -> Result<Vec<ActionSummary>, ApiError> {
        let p = self.project()?;
        let Some(d) = p.load_domain()? else {
            return Ok(Vec::new());
        };
        let report = audit_domain(&d, p.config.audit);
        let revisions = p.load_revisions()?;
        Ok(d.actions
            .iter()
            .map(|a| {
                let findings = report.for_action(&a.name).count();
                ActionSummary {
                    name: a.name.clone(),
                    clean: findings == 0,
                    findings,
                    revisions: revisions.iter().filter(|r| r.action == a.name).count(),
                    in_flight: self.is_in_flight(&a.name),
                }
            })
            .collect())
    }

    pub fn action(&self, name: &str) -> Result<ActionDetail, ApiError> {
        let p = self.project()?;
        let d = p.require_domain()?;
        let a = d
            .action(name)
            .ok_or_else(|| ApiError::new("unknown-action", format!("unknown action '{name}'")))?;
        let reg = Self::registry(&p, &d)?;
        let (nl, nl_error) = match render_model_nl(a, &reg) {
            Ok(t) => (Some(t), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let full = audit_domain(&d, p.config.audit);
        let audit = AuditReport {
            findings: full.for_action(name).cloned().collect(),
            clean: full.for_action(name).next().is_none(),
        };
        Ok(ActionDetail {
            name: a.name.clone(),
            pddl: print_action(a, 0),
            nl,
            nl_error,
            audit,
            revisions: p.load_revisions()?.into_iter().filter(|r| r.action == name).collect(),
            events: p.load_events()?.into_iter().filter(|e| e.target_action == name).collect(),
            in_flight: self.is_in_flight(name),
        })
    }

    /// Applies one feedback message to an action. A second request for the
    /// same action while one is running fails with `revision-in-flight`;
    /// requests for different actions queue on the writer lock.
    pub fn feedback(&self, action: &str, req: FeedbackRequest) -> Result<FeedbackResponse, ApiError> {
        let _slot = {
            let mut set = relock(&self.in_flight);
            if !set.insert(action.to_string()) {
                return Err(ApiError::new(
                    "revision-in-flight",
                    format!("a revision of '{action}' is already in flight"),
                ));
            }
            InFlight {
                set: &self.in_flight,
                action: action.to_string(),
            }
        };
        let _w = relock(&self.writer);
        let p = self.project()?;
        let d = p.require_domain()?;
        if d.action(action).is_none() {
            return Err(ApiError::new("unknown-action", format!("unknown action '{action}'")));
        }
        let _lock = p.lock()?;
        let mut s = p.correction_session()?;
        s.set_transport(self.transport_for(&p)?);

        let source = req.source.unwrap_or(FeedbackSource::Human);
        let mut fb = match (source, req.text) {
            (FeedbackSource::Auditor, None) => {
                let report = s.audit_action(action).expect("action exists");
                let f = report
                    .findings
                    .iter()
                    .find(|f| f.kind != FindingKind::RedundantPrecondition)
                    .ok_or_else(|| ApiError::new("no-findings", format!("the audit of '{action}' has no findings")))?;
                Feedback::from_finding(f)
            }
            (_, None) => return Err(ApiError::new("empty-feedback", "feedback text is empty")),
            (src, Some(text)) => Feedback {
                source: src,
                text,
                issue: None,
            },
        };
        if let Some(issue) = req.issue {
            fb = fb.with_issue(issue);
        }
        let (event, revision) = apply_feedback(&mut s, action, fb)?;
        p.save_correction(&mut s)?;
        self.feed.push(ChangeKind::Revision, Some(action), None, Some(revision.id));
        Ok(FeedbackResponse {
            event,
            audit: revision.audit.clone(),
            revision,
        })
    }

    /// Resolves the objects and initial state of a request. Suite tasks
    /// keep their problem file's goal.
    fn context(&self, p: &Project, d: &DomainModel, task: Option<&str>, problem: Option<&str>) -> Result<(String, Option<String>, ProblemSpec), ApiError> {
        match (task, problem) {
            (Some(id), _) => {
                let e = p
                    .load_suite()?
                    .into_iter()
                    .find(|e| e.id == id)
                    .ok_or_else(|| ApiError::new("unknown-task", format!("unknown task '{id}'")))?;
                let spec = p.load_problem(Path::new(&e.problem), d)?;
                Ok((e.id, Some(e.instruction), spec))
            }
            (None, Some(text)) => {
                let spec = parse_problem(text, d).map_err(|e| pddl_error("invalid-problem", e))?;
                Ok((spec.name.clone(), None, spec))
            }
            (None, None) => Err(ApiError::new("missing-problem", "give a task id or problem PDDL")),
        }
    }

    pub fn validate(&self, req: &ValidateRequest) -> Result<ValidationReport, ApiError> {
        let p = self.project()?;
        let d = p.require_domain()?;
        let (_, _, spec) = self.context(&p, &d, req.task.as_deref(), req.problem.as_deref())?;
        let plan = parse_plan(&req.plan).map_err(|e| pddl_error("invalid-plan", e))?;
        Ok(validate_plan(&d, &spec, &plan))
    }

    pub fn localize(&self, req: &ValidateRequest) -> Result<Localization, ApiError> {
        let p = self.project()?;
        let d = p.require_domain()?;
        let (_, _, spec) = self.context(&p, &d, req.task.as_deref(), req.problem.as_deref())?;
        let plan = parse_plan(&req.plan).map_err(|e| pddl_error("invalid-plan", e))?;
        Ok(localize_error(&d, &spec, &plan))
    }

    fn instruction(&self, p: &Project, d: &DomainModel, req: &PlanRequest) -> Result<Instruction, ApiError> {
        let (id, suite_text, mut spec) = self.context(p, d, req.task.as_deref(), req.problem.as_deref())?;
        let own_goal = std::mem::take(&mut spec.goal);
        let text = req.instruction.clone().or(suite_text);
        let mut instr = Instruction::new(id, text.clone().unwrap_or_default(), spec);
        if let Some(g) = &req.goal {
            instr.goal = Some(parse_goal(g).map_err(|e| pddl_error("invalid-goal", e))?);
        } else if text.is_none() {
            if own_goal.is_empty() {
                return Err(ApiError::new("missing-instruction", "give an instruction or a goal"));
            }
            instr.goal = Some(own_goal);
        }
        Ok(instr)
    }

    /// Goal translation and classical search for one instruction. The run
    /// is appended to the run log, including rejected translations.
    pub fn plan(&self, req: &PlanRequest) -> Result<PlanResponse, ApiError> {
        let p = self.project()?;
        let d = p.require_domain()?;
        let instr = self.instruction(&p, &d, req)?;
        let gw = self.gateway(&p)?;
        let started = Instant::now();
        let run = classical_pipeline(&gw, &instr, &d, &p.config.description, &p.config.search);
        p.append_runs(&[RunRecord::classical(&instr.id, &run, started)])?;
        self.feed.push(ChangeKind::Run, None, Some(&instr.id), None);
        let run = run?;
        let validation = run.result.plan().map(|plan| validate_plan(&d, &run.problem, plan));
        Ok(PlanResponse {
            task: instr.id,
            goal: run.problem.goal.iter().map(|l| l.to_string()).collect(),
            result: run.result,
            validation,
        })
    }

    /// Runs every suite task through the classical pipeline.
    pub fn plan_suite(&self) -> Result<SuiteResponse, ApiError> {
        let p = self.project()?;
        let d = p.require_domain()?;
        let gw = self.gateway(&p)?;
        let mut runs = Vec::new();
        for e in p.load_suite()? {
            let instr = p.suite_instruction(&e, &d)?;
            let started = Instant::now();
            let run = classical_pipeline(&gw, &instr, &d, &p.config.description, &p.config.search);
            if let Err(OrchestratorError::Llm(e)) = &run {
                return Err(ApiError::new("llm-error", e.to_string()));
            }
            runs.push(RunRecord::classical(&instr.id, &run, started));
        }
        p.append_runs(&runs)?;
        self.feed.push(ChangeKind::Run, None, None, None);
        Ok(SuiteResponse {
            mode: "classical".into(),
            solved: runs.iter().filter(|r| r.solved()).count(),
            total: runs.len(),
            runs,
        })
    }

    /// The planner-model loop with validator feedback. The transcript is
    /// written to `runs/<transcript>.jsonl`, replacing an earlier one.
    pub fn llm_plan(&self, req: &PlanRequest) -> Result<LoopOutcome, ApiError> {
        let p = self.project()?;
        let d = p.require_domain()?;
        let instr = self.instruction(&p, &d, req)?;
        let gw = self.gateway(&p)?;
        let started = Instant::now();
        let (outcome, mut conv) = llm_plan_loop(&gw, &instr, &d, &p.loop_config())?;
        let dir = p.path("runs");
        let log = pddlforge::llm::Conversation::path_in(&dir, &conv.id);
        if log.exists() {
            fs::remove_file(&log)?;
        }
        conv.persist(&dir)?;
        p.append_runs(&[RunRecord::llm(&instr.id, &outcome, started)])?;
        self.feed.push(ChangeKind::Run, None, Some(&instr.id), None);
        Ok(outcome)
    }

    pub fn runs(&self) -> Result<Vec<RunRecord>, ApiError> {
        Ok(self.project()?.load_runs()?)
    }

    pub fn report(&self) -> Result<Report, ApiError> {
        let p = self.project()?;
        let d = p.load_domain()?;
        let events = p.load_events()?;
        let construction_messages = p
            .load_conversations()?
            .values()
            .map(|c| c.len())
            .sum();
        let mut latest: BTreeMap<(String, String), RunRecord> = BTreeMap::new();
        for r in p.load_runs()? {
            latest.insert((r.mode.clone(), r.task_id.clone()), r);
        }
        let mut by_mode: BTreeMap<String, Vec<RunRecord>> = BTreeMap::new();
        for ((mode, _), r) in latest {
            by_mode.entry(mode).or_default().push(r);
        }
        let runs = by_mode
            .into_iter()
            .map(|(mode, rs)| RunSummary {
                solved: rs.iter().filter(|r| r.solved()).count(),
                total: rs.len(),
                mean_rounds: rs.iter().map(|r| r.rounds as f64).sum::<f64>() / rs.len() as f64,
                mode,
            })
            .collect();
        Ok(Report {
            project: p.config.name.clone(),
            actions: d.as_ref().map_or(0, |d| d.actions.len()),
            predicates: d.as_ref().map_or(0, |d| d.predicates.len()),
            construction_messages,
            ledger: feedback_ledger(&events),
            runs,
        })
    }
}

/// Reads a domain file for auditing, keeping unsupported constructs.
pub fn audit_file(path: &Path) -> Result<DomainModel, ApiError> {
    let text = fs::read_to_string(path)?;
    parse_domain_with(&text, ParseMode::Lenient).map_err(|e| {
        ApiError::new("corrupt-artifact", format!("{}: {e}", path.display()))
    })
}
