//! Grounding plus heuristic forward search, with an optional external
//! planner reached through a subprocess.

mod external;
mod ground;
mod heuristic;
mod search;

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::pddl::{DomainModel, Plan, ProblemSpec};
use crate::state::{validate_plan, ValidationReport};

pub use external::run_external;
pub use ground::{enumerate_bindings, ground, FactId, GroundTask, TaskAction};
pub use heuristic::{HeuristicKind, Relaxation};
pub use search::search;

pub const DEFAULT_GROUNDING_CAP: usize = 1_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Astar,
    #[default]
    Gbfs,
    Bfs,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Backend {
    #[default]
    Builtin,
    /// Argument template with `{domain}`, `{problem}` and `{plan}` placeholders.
    External { command: Vec<String> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub strategy: Strategy,
    pub heuristic: HeuristicKind,
    pub max_expansions: u64,
    pub time_limit_secs: f64,
    pub max_ground_actions: usize,
    pub prune_unreachable: bool,
    pub backend: Backend,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::Gbfs,
            heuristic: HeuristicKind::Hadd,
            max_expansions: 1_000_000,
            time_limit_secs: 60.0,
            max_ground_actions: DEFAULT_GROUNDING_CAP,
            prune_unreachable: false,
            backend: Backend::Builtin,
        }
    }
}

impl SearchConfig {
    /// Blind breadth-first search; returns shortest plans.
    pub fn optimal() -> Self {
        Self {
            strategy: Strategy::Bfs,
            heuristic: HeuristicKind::Blind,
            ..Self::default()
        }
    }

    pub fn time_limit(&self) -> Duration {
        Duration::from_secs_f64(self.time_limit_secs.max(0.0))
    }

    pub fn check(&self) -> Result<(), PlannerError> {
        if self.max_expansions == 0 {
            return Err(PlannerError::InvalidConfig("max_expansions must be positive".into()));
        }
        if !(self.time_limit_secs > 0.0) || !self.time_limit_secs.is_finite() {
            return Err(PlannerError::InvalidConfig("time_limit_secs must be positive".into()));
        }
        if self.max_ground_actions == 0 {
            return Err(PlannerError::InvalidConfig("max_ground_actions must be positive".into()));
        }
        if let Backend::External { command } = &self.backend {
            if command.is_empty() {
                return Err(PlannerError::InvalidConfig("external planner command is empty".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Outcome {
    Plan(Plan),
    Unsolvable,
    ResourceLimit { reason: String },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub expansions: u64,
    pub generated: u64,
    pub wall_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan_length: Option<usize>,
    #[serde(default)]
    pub ground_actions: usize,
    #[serde(default)]
    pub facts: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanResult {
    pub outcome: Outcome,
    pub stats: SearchStats,
}

impl PlanResult {
    pub fn plan(&self) -> Option<&Plan> {
        match &self.outcome {
            Outcome::Plan(p) => Some(p),
            _ => None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PlannerError {
    #[error("grounding would produce {count} actions, over the cap of {cap}")]
    GroundingExplosion { count: usize, cap: usize },
    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
    #[error("external planner failed: {message}\n--- stdout ---\n{stdout}\n--- stderr ---\n{stderr}")]
    ExternalPlannerFailure {
        message: String,
        stdout: String,
        stderr: String,
    },
    #[error("planner returned a plan that does not validate: {0:?}")]
    UnsoundPlan(Box<ValidationReport>),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Grounds, searches and validates. A plan is only released after the state
/// engine accepts it.
pub fn solve(d: &DomainModel, p: &ProblemSpec, cfg: &SearchConfig) -> Result<PlanResult, PlannerError> {
    cfg.check()?;
    let result = match &cfg.backend {
        Backend::Builtin => {
            let task = ground(d, p, cfg.max_ground_actions, cfg.prune_unreachable)?;
            let mut r = search(&task, cfg);
            r.stats.ground_actions = task.actions.len();
            r.stats.facts = task.num_facts();
            r
        }
        Backend::External { command } => run_external(d, p, command, cfg.time_limit())?,
    };
    if let Outcome::Plan(plan) = &result.outcome {
        let report = validate_plan(d, p, plan);
        if !report.is_valid() {
            return Err(PlannerError::UnsoundPlan(Box::new(report)));
        }
    }
    Ok(result)
}
