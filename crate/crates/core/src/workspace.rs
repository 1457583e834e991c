//! Project directory: configuration, templates and every artifact produced
//! by construction, correction and planning. All files are text.
//!
//! ```text
//! project.cfg          configuration (TOML)
//! templates/           prompt and feedback template overrides
//! conversations/       one JSONL log per conversation
//! cassettes/           recorded replies for the replay transport
//! problems/            task files (PDDL problems) and suite.jsonl
//! domain.draft.pddl    domain as constructed
//! domain.pddl          domain after correction
//! predicates.txt       predicate registry
//! events.jsonl         feedback events
//! revisions.jsonl      model revisions
//! runs/runs.jsonl      planning run records
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::audit::AuditConfig;
use crate::builder::{build_domain, ActionDescription, BuildError, ConstructionSession, DomainBrief};
use crate::correction::{CorrectionSession, FeedbackEvent, ModelRevision};
use crate::llm::{Clock, Conversation, LlmError, Transport, TransportMode};
use crate::orchestrator::{Gateway, Instruction, LoopConfig, RunRecord, DEFAULT_ROUND_CAP};
use crate::pddl::{parse_domain, parse_problem, print_domain, DomainModel, PddlError, ProblemSpec, TypeHierarchy};
use crate::planner::SearchConfig;
use crate::registry::PredicateRegistry;
use crate::templates::TemplateSet;

pub const SCHEMA_VERSION: u32 = 1;

pub const CONFIG_FILE: &str = "project.cfg";
pub const DRAFT_FILE: &str = "domain.draft.pddl";
pub const DOMAIN_FILE: &str = "domain.pddl";
pub const REGISTRY_FILE: &str = "predicates.txt";
pub const EVENTS_FILE: &str = "events.jsonl";
pub const REVISIONS_FILE: &str = "revisions.jsonl";
pub const LOCK_FILE: &str = ".lock";
pub const SUITE_FILE: &str = "problems/suite.jsonl";

#[derive(Debug, thiserror::Error)]
pub enum WorkspaceError {
    #[error("project schema version {found} is not supported (expected {expected})")]
    SchemaVersionMismatch { found: u32, expected: u32 },
    #[error("corrupt artifact {path}: {message}")]
    CorruptArtifact { path: PathBuf, message: String },
    #[error("{0} is not a project directory")]
    NotAProject(PathBuf),
    #[error("{0} already contains a project")]
    AlreadyInitialized(PathBuf),
    #[error("project is locked by another writer ({0})")]
    Locked(PathBuf),
    #[error("registry and domain disagree: {0}")]
    Inconsistent(String),
    #[error("no domain model yet; run construction first")]
    NoDomain,
    #[error("a draft domain already exists; pass force to rebuild it")]
    AlreadyConstructed,
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn default_round_cap() -> usize {
    DEFAULT_ROUND_CAP
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectConfig {
    pub schema_version: u32,
    pub name: String,
    pub description: String,
    /// `name - parent` or `name` (child of `object`), in declaration order.
    #[serde(default)]
    pub types: Vec<String>,
    /// Fixed examples shown to the planner model.
    #[serde(default)]
    pub planner_examples: String,
    #[serde(default = "default_round_cap")]
    pub round_cap: usize,
    /// Timestamp for every message; unset means the system clock.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_clock: Option<u64>,
    pub transport: TransportMode,
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default)]
    pub audit: AuditConfig,
    #[serde(default)]
    pub actions: Vec<ActionDescription>,
}

impl ProjectConfig {
    pub fn new(name: impl Into<String>, description: impl Into<String>, transport: TransportMode) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            name: name.into(),
            description: description.into(),
            types: Vec::new(),
            planner_examples: String::new(),
            round_cap: DEFAULT_ROUND_CAP,
            fixed_clock: None,
            transport,
            search: SearchConfig::default(),
            audit: AuditConfig::default(),
            actions: Vec::new(),
        }
    }

    pub fn hierarchy(&self) -> Result<TypeHierarchy, PddlError> {
        let pairs = self.types.iter().map(|t| match t.split_once(" - ") {
            Some((n, p)) => (n.trim().to_string(), p.trim().to_string()),
            None => (t.trim().to_string(), "object".to_string()),
        });
        TypeHierarchy::from_pairs(pairs)
    }

    pub fn clock(&self) -> Clock {
        match self.fixed_clock {
            Some(t) => Clock::Fixed(t),
            None => Clock::System,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }
}

/// One task of a project's suite: an instruction and the problem file that
/// supplies its objects and initial state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub id: String,
    pub instruction: String,
    /// Path relative to `problems/`.
    pub problem: String,
}

/// Exclusive writer lock, released on drop.
#[derive(Debug)]
pub struct ProjectLock {
    path: PathBuf,
}

impl Drop for ProjectLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

#[derive(Clone, Debug)]
pub struct Project {
    pub root: PathBuf,
    pub config: ProjectConfig,
    pub templates: TemplateSet,
}

fn corrupt(path: &Path, message: impl ToString) -> WorkspaceError {
    WorkspaceError::CorruptArtifact {
        path: path.to_path_buf(),
        message: message.to_string(),
    }
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, WorkspaceError> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.split_inclusive('\n').enumerate() {
        if !line.ends_with('\n') {
            return Err(corrupt(path, format!("line {} is incomplete", i + 1)));
        }
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(line).map_err(|e| corrupt(path, format!("line {}: {e}", i + 1)))?);
    }
    Ok(out)
}

fn append_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), WorkspaceError> {
    if items.is_empty() {
        return Ok(());
    }
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut buf = String::new();
    for it in items {
        buf.push_str(&serde_json::to_string(it).map_err(|e| corrupt(path, e))?);
        buf.push('\n');
    }
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    f.write_all(buf.as_bytes())?;
    Ok(())
}

impl Project {
    /// Creates the directory layout and writes the configuration and the
    /// default templates.
    pub fn init(root: &Path, config: ProjectConfig) -> Result<Self, WorkspaceError> {
        if root.join(CONFIG_FILE).exists() {
            return Err(WorkspaceError::AlreadyInitialized(root.to_path_buf()));
        }
        config.hierarchy().map_err(|e| corrupt(&root.join(CONFIG_FILE), e))?;
        for dir in ["templates", "conversations", "cassettes", "problems", "runs"] {
            fs::create_dir_all(root.join(dir))?;
        }
        TemplateSet::defaults().write_missing(&root.join("templates"))?;
        let project = Self {
            root: root.to_path_buf(),
            config,
            templates: TemplateSet::defaults(),
        };
        project.save()?;
        Ok(project)
    }

    pub fn load(root: &Path) -> Result<Self, WorkspaceError> {
        let path = root.join(CONFIG_FILE);
        if !path.is_file() {
            return Err(WorkspaceError::NotAProject(root.to_path_buf()));
        }
        let text = fs::read_to_string(&path)?;
        let raw: toml::Table = toml::from_str(&text).map_err(|e| corrupt(&path, e))?;
        let found = raw
            .get("schema_version")
            .and_then(|v| v.as_integer())
            .ok_or_else(|| corrupt(&path, "missing schema_version"))?;
        if found != SCHEMA_VERSION as i64 {
            return Err(WorkspaceError::SchemaVersionMismatch {
                found: found.try_into().unwrap_or(u32::MAX),
                expected: SCHEMA_VERSION,
            });
        }
        let config: ProjectConfig = toml::from_str(&text).map_err(|e| corrupt(&path, e))?;
        config.hierarchy().map_err(|e| corrupt(&path, e))?;
        let templates = TemplateSet::load_dir(&root.join("templates")).map_err(|e| match e {
            LlmError::Io(e) => WorkspaceError::Io(e),
            other => corrupt(&root.join("templates"), other),
        })?;
        Ok(Self {
            root: root.to_path_buf(),
            config,
            templates,
        })
    }

    /// Writes the configuration. Saving an unchanged project leaves the
    /// file byte-identical.
    pub fn save(&self) -> Result<(), WorkspaceError> {
        let path = self.root.join(CONFIG_FILE);
        let text = self.config.to_toml();
        if fs::read_to_string(&path).ok().as_deref() != Some(text.as_str()) {
            fs::write(path, text)?;
        }
        Ok(())
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    pub fn conversations_dir(&self) -> PathBuf {
        self.root.join("conversations")
    }

    pub fn runs_file(&self) -> PathBuf {
        self.root.join("runs").join("runs.jsonl")
    }

    pub fn lock(&self) -> Result<ProjectLock, WorkspaceError> {
        let path = self.root.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(ProjectLock { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(WorkspaceError::Locked(path)),
            Err(e) => Err(e.into()),
        }
    }

    pub fn hierarchy(&self) -> TypeHierarchy {
        self.config.hierarchy().expect("checked on load")
    }

    pub fn brief(&self) -> DomainBrief {
        DomainBrief {
            name: self.config.name.clone(),
            description: self.config.description.clone(),
            types: self.hierarchy(),
            actions: self.config.actions.clone(),
        }
    }

    pub fn transport(&self) -> Result<Arc<dyn Transport>, WorkspaceError> {
        Ok(Arc::from(self.config.transport.build(&self.root)?))
    }

    pub fn gateway(&self) -> Result<Gateway, WorkspaceError> {
        Ok(Gateway::new(self.templates.clone(), self.transport()?, self.config.clock()))
    }

    pub fn loop_config(&self) -> LoopConfig {
        LoopConfig {
            cap: self.config.round_cap,
            domain_description: self.config.description.clone(),
            examples: self.config.planner_examples.clone(),
        }
    }

    fn read_domain(&self, file: &str) -> Result<Option<DomainModel>, WorkspaceError> {
        let path = self.root.join(file);
        if !path.exists() {
            return Ok(None);
        }
        let text = fs::read_to_string(&path)?;
        parse_domain(&text).map(Some).map_err(|e| corrupt(&path, e))
    }

    pub fn load_draft(&self) -> Result<Option<DomainModel>, WorkspaceError> {
        self.read_domain(DRAFT_FILE)
    }

    /// The corrected domain, else the draft.
    pub fn load_domain(&self) -> Result<Option<DomainModel>, WorkspaceError> {
        match self.read_domain(DOMAIN_FILE)? {
            Some(d) => Ok(Some(d)),
            None => self.load_draft(),
        }
    }

    pub fn require_domain(&self) -> Result<DomainModel, WorkspaceError> {
        self.load_domain()?.ok_or(WorkspaceError::NoDomain)
    }

    pub fn load_registry(&self) -> Result<PredicateRegistry, WorkspaceError> {
        let path = self.root.join(REGISTRY_FILE);
        if !path.exists() {
            return Ok(PredicateRegistry::new());
        }
        let text = fs::read_to_string(&path)?;
        PredicateRegistry::from_text(&text).map_err(|(line, e)| corrupt(&path, format!("line {line}: {e}")))
    }

    /// Writes the registry and the domain, refusing if their predicate
    /// lists differ. `draft` selects the construction output file.
    pub fn save_domain(&self, d: &DomainModel, reg: &PredicateRegistry, draft: bool) -> Result<(), WorkspaceError> {
        let in_domain: BTreeSet<&str> = d.predicates.iter().map(|p| p.name.as_str()).collect();
        let in_reg: BTreeSet<&str> = reg.entries().iter().map(|p| p.name.as_str()).collect();
        if in_domain != in_reg {
            let missing: Vec<_> = in_reg.symmetric_difference(&in_domain).copied().collect();
            return Err(WorkspaceError::Inconsistent(missing.join(", ")));
        }
        fs::write(self.root.join(REGISTRY_FILE), reg.to_text())?;
        let file = if draft { DRAFT_FILE } else { DOMAIN_FILE };
        fs::write(self.root.join(file), print_domain(d))?;
        Ok(())
    }

    pub fn load_conversations(&self) -> Result<BTreeMap<String, Conversation>, WorkspaceError> {
        let dir = self.conversations_dir();
        let mut out = BTreeMap::new();
        if !dir.exists() {
            return Ok(out);
        }
        let mut paths: Vec<PathBuf> = fs::read_dir(&dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        paths.sort();
        for p in paths {
            let id = p.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
            let c = Conversation::load(&dir, &id).map_err(|e| corrupt(&p, e))?;
            out.insert(c.id.clone(), c);
        }
        Ok(out)
    }

    pub fn load_events(&self) -> Result<Vec<FeedbackEvent>, WorkspaceError> {
        read_jsonl(&self.root.join(EVENTS_FILE))
    }

    pub fn load_revisions(&self) -> Result<Vec<ModelRevision>, WorkspaceError> {
        read_jsonl(&self.root.join(REVISIONS_FILE))
    }

    pub fn load_runs(&self) -> Result<Vec<RunRecord>, WorkspaceError> {
        read_jsonl(&self.runs_file())
    }

    pub fn append_runs(&self, runs: &[RunRecord]) -> Result<(), WorkspaceError> {
        append_jsonl(&self.runs_file(), runs)
    }

    pub fn load_problem(&self, path: &Path, d: &DomainModel) -> Result<ProblemSpec, WorkspaceError> {
        let path = if path.is_absolute() || path.exists() {
            path.to_path_buf()
        } else {
            self.root.join("problems").join(path)
        };
        let text = fs::read_to_string(&path)?;
        parse_problem(&text, d).map_err(|e| corrupt(&path, e))
    }

    pub fn load_suite(&self) -> Result<Vec<SuiteEntry>, WorkspaceError> {
        read_jsonl(&self.root.join(SUITE_FILE))
    }

    /// The entry as an instruction; the problem file's goal is dropped so
    /// the goal has to come from the instruction text.
    pub fn suite_instruction(&self, e: &SuiteEntry, d: &DomainModel) -> Result<Instruction, WorkspaceError> {
        let mut context = self.load_problem(Path::new(&e.problem), d)?;
        context.goal.clear();
        Ok(Instruction::new(e.id.clone(), e.instruction.clone(), context))
    }

    /// Runs two-pass construction through `transport` and writes the draft,
    /// the registry and the conversations. With `force`, earlier
    /// construction and correction artifacts are removed first.
    pub fn construct(&self, transport: Arc<dyn Transport>, force: bool) -> Result<ConstructionSession, WorkspaceError> {
        if self.root.join(DRAFT_FILE).exists() {
            if !force {
                return Err(WorkspaceError::AlreadyConstructed);
            }
            for f in [DRAFT_FILE, DOMAIN_FILE, REGISTRY_FILE, EVENTS_FILE, REVISIONS_FILE] {
                let path = self.root.join(f);
                if path.exists() {
                    fs::remove_file(path)?;
                }
            }
            let dir = self.conversations_dir();
            if dir.exists() {
                fs::remove_dir_all(&dir)?;
            }
        }
        let mut s = ConstructionSession::new(self.brief(), self.templates.clone(), transport, self.config.clock());
        s.audit = self.config.audit;
        let (draft, registry) = build_domain(&mut s)?;
        s.persist(&self.conversations_dir())?;
        self.save_domain(&draft, &registry, true)?;
        Ok(s)
    }

    /// Correction state rebuilt from the artifacts on disk.
    pub fn correction_session(&self) -> Result<CorrectionSession, WorkspaceError> {
        let domain = self.require_domain()?;
        let registry = if self.root.join(REGISTRY_FILE).exists() {
            self.load_registry()?
        } else {
            PredicateRegistry::from_domain(&domain)
        };
        let mut s = CorrectionSession::new(
            domain,
            registry,
            self.load_conversations()?,
            self.templates.clone(),
            self.transport()?,
            self.config.clock(),
        );
        s.audit = self.config.audit;
        s.events = self.load_events()?;
        s.revisions = self.load_revisions()?;
        Ok(s)
    }

    /// Persists what `s` added since it was loaded: new events and
    /// revisions, conversation messages and the corrected domain.
    pub fn save_correction(&self, s: &mut CorrectionSession) -> Result<(), WorkspaceError> {
        let known_events = self.load_events()?.len();
        let known_revisions = self.load_revisions()?.len();
        let dir = self.conversations_dir();
        for c in s.conversations.values_mut() {
            c.persist(&dir)?;
        }
        append_jsonl(&self.root.join(EVENTS_FILE), &s.events[known_events.min(s.events.len())..])?;
        append_jsonl(
            &self.root.join(REVISIONS_FILE),
            &s.revisions[known_revisions.min(s.revisions.len())..],
        )?;
        self.save_domain(&s.domain, &s.registry, false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> ProjectConfig {
        let mut c = ProjectConfig::new(
            "kitchen",
            "A robot tidies a kitchen.",
            TransportMode::Scripted { responses: vec![] },
        );
        c.types = vec!["furnitureAppliance".into(), "householdObject".into(), "smallReceptacle - householdObject".into()];
        c.actions.push(ActionDescription::new("open", "Open a cabinet.").with_extra("Hands must be free."));
        c
    }

    #[test]
    fn init_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let p = Project::init(dir.path(), config()).unwrap();
        let q = Project::load(dir.path()).unwrap();
        assert_eq!(p.config, q.config);
        assert!(q.hierarchy().is_subtype("smallReceptacle", "householdObject").unwrap());
        let before = fs::read(dir.path().join(CONFIG_FILE)).unwrap();
        q.save().unwrap();
        assert_eq!(before, fs::read(dir.path().join(CONFIG_FILE)).unwrap());
        assert!(matches!(
            Project::init(dir.path(), config()),
            Err(WorkspaceError::AlreadyInitialized(_))
        ));
    }

    #[test]
    fn schema_version_is_checked() {
        let dir = tempfile::tempdir().unwrap();
        Project::init(dir.path(), config()).unwrap();
        let path = dir.path().join(CONFIG_FILE);
        let text = fs::read_to_string(&path).unwrap().replace("schema_version = 1", "schema_version = 2");
        fs::write(&path, text).unwrap();
        assert!(matches!(
            Project::load(dir.path()),
            Err(WorkspaceError::SchemaVersionMismatch { found: 2, expected: 1 })
        ));
    }

    #[test]
    fn corrupt_registry() {
        let dir = tempfile::tempdir().unwrap();
        let p = Project::init(dir.path(), config()).unwrap();
        fs::write(dir.path().join(REGISTRY_FILE), "(broken ?x - \n").unwrap();
        assert!(matches!(p.load_registry(), Err(WorkspaceError::CorruptArtifact { .. })));
    }

    #[test]
    fn lock_is_exclusive() {
        let dir = tempfile::tempdir().unwrap();
        let p = Project::init(dir.path(), config()).unwrap();
        let guard = p.lock().unwrap();
        assert!(matches!(p.lock(), Err(WorkspaceError::Locked(_))));
        drop(guard);
        p.lock().unwrap();
    }
}
