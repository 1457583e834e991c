//! Ground-state progression and plan validation.
//!
//! Closed world: a fact absent from a [`State`] is false. Negative
//! preconditions are checked directly against the state. When a literal is
//! both deleted and added by one action, the delete is applied first so the
//! literal ends up true.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::pddl::{
    is_variable, Atom, ActionModel, DomainModel, Literal, Plan, PlanStep, ProblemSpec,
};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct State {
    facts: BTreeSet<Atom>,
}

impl State {
    pub fn new<I: IntoIterator<Item = Atom>>(facts: I) -> Self {
        Self {
            facts: facts.into_iter().collect(),
        }
    }

    pub fn initial(problem: &ProblemSpec) -> Self {
        Self::new(problem.init.iter().cloned())
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.facts.contains(atom)
    }

    pub fn holds(&self, lit: &Literal) -> bool {
        self.contains(&lit.atom) == lit.positive
    }

    pub fn facts(&self) -> impl Iterator<Item = &Atom> {
        self.facts.iter()
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }
}

impl Serialize for State {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.facts.iter().map(|a| a.to_string()))
    }
}

impl<'de> Deserialize<'de> for State {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw: Vec<String> = Vec::deserialize(d)?;
        let mut facts = BTreeSet::new();
        for r in raw {
            let lit = literal_strings::parse(&r).map_err(serde::de::Error::custom)?;
            facts.insert(lit.atom);
        }
        Ok(State { facts })
    }
}

/// Literals serialized in their PDDL text form, e.g. `"(not (opened f1))"`.
pub mod literal_strings {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::pddl::{sexpr::read_one, Atom, Literal};

    pub fn serialize<S: Serializer>(lits: &[Literal], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(lits.iter().map(|l| l.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Literal>, D::Error> {
        let raw: Vec<String> = Vec::deserialize(d)?;
        raw.iter()
            .map(|r| parse(r).map_err(serde::de::Error::custom))
            .collect()
    }

    pub fn parse(text: &str) -> Result<Literal, String> {
        let e = read_one(text).map_err(|e| e.to_string())?;
        let (positive, inner) = match e.head().as_deref() {
            Some("not") => match e.list() {
                Some([_, inner]) => (false, inner.clone()),
                _ => return Err(format!("bad literal {text}")),
            },
            _ => (true, e),
        };
        let items = inner.list().ok_or_else(|| format!("bad literal {text}"))?;
        let mut names = items.iter().map(|i| i.symbol().map(str::to_string));
        let predicate = names
            .next()
            .flatten()
            .ok_or_else(|| format!("bad literal {text}"))?;
        let args = names
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| format!("bad literal {text}"))?;
        Ok(Literal {
            positive,
            atom: Atom { predicate, args },
        })
    }
}

/// An action schema instantiated with objects.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundAction {
    pub schema: String,
    pub binding: Vec<(String, String)>,
    pub precondition: Vec<Literal>,
    pub add: Vec<Atom>,
    pub del: Vec<Atom>,
}

impl GroundAction {
    pub fn args(&self) -> Vec<String> {
        self.binding.iter().map(|(_, o)| o.clone()).collect()
    }

    pub fn step(&self) -> PlanStep {
        PlanStep::new(self.schema.clone(), self.args())
    }
}

impl fmt::Display for GroundAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.step())
    }
}

/// Why a plan step's arguments cannot bind to its schema.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "problem", rename_all = "kebab-case")]
pub enum ParamDiagnostic {
    UnknownAction {
        action: String,
    },
    WrongArity {
        action: String,
        expected: usize,
        found: usize,
    },
    UnknownObject {
        object: String,
        position: usize,
    },
    TypeMismatch {
        object: String,
        position: usize,
        expected: String,
        found: String,
    },
    ConstraintViolated {
        left: String,
        right: String,
        must_be_equal: bool,
    },
}

impl fmt::Display for ParamDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use crate::pddl::ordinal;
        match self {
            ParamDiagnostic::UnknownAction { action } => {
                write!(f, "'{action}' is not a known action")
            }
            ParamDiagnostic::WrongArity {
                action,
                expected,
                found,
            } => write!(
                f,
                "'{action}' takes {expected} parameter(s) but {found} were given"
            ),
            ParamDiagnostic::UnknownObject { object, position } => write!(
                f,
                "the {} parameter '{object}' is not a known object",
                ordinal(*position)
            ),
            ParamDiagnostic::TypeMismatch {
                object,
                position,
                expected,
                found,
            } => write!(
                f,
                "the {} parameter should be a {expected}, but '{object}' is a {found}",
                ordinal(*position)
            ),
            ParamDiagnostic::ConstraintViolated {
                left,
                right,
                must_be_equal,
            } => {
                if *must_be_equal {
                    write!(f, "'{left}' and '{right}' must be the same object")
                } else {
                    write!(f, "'{left}' and '{right}' must be different objects")
                }
            }
        }
    }
}

fn substitute(atom: &Atom, binding: &[(String, String)]) -> Atom {
    Atom {
        predicate: atom.predicate.clone(),
        args: atom
            .args
            .iter()
            .map(|a| {
                binding
                    .iter()
                    .find(|(v, _)| v == a)
                    .map(|(_, o)| o.clone())
                    .unwrap_or_else(|| a.clone())
            })
            .collect(),
    }
}

/// Binds `args` to the schema's parameters, checking arity, declared
/// objects, types and (in)equality constraints.
pub fn ground_action(
    schema: &ActionModel,
    args: &[String],
    domain: &DomainModel,
    problem: &ProblemSpec,
) -> Result<GroundAction, ParamDiagnostic> {
    if schema.params.len() != args.len() {
        return Err(ParamDiagnostic::WrongArity {
            action: schema.name.clone(),
            expected: schema.params.len(),
            found: args.len(),
        });
    }
    let mut binding = Vec::with_capacity(args.len());
    for (i, (p, obj)) in schema.params.iter().zip(args).enumerate() {
        let ty = problem
            .object_type(obj)
            .ok_or_else(|| ParamDiagnostic::UnknownObject {
                object: obj.clone(),
                position: i + 1,
            })?;
        if !domain.types.is_subtype(ty, &p.ty).unwrap_or(false) {
            return Err(ParamDiagnostic::TypeMismatch {
                object: obj.clone(),
                position: i + 1,
                expected: p.ty.clone(),
                found: ty.to_string(),
            });
        }
        binding.push((p.name.clone(), obj.clone()));
    }
    let lookup = |t: &String| -> String {
        if is_variable(t) {
            binding
                .iter()
                .find(|(v, _)| v == t)
                .map(|(_, o)| o.clone())
                .unwrap_or_else(|| t.clone())
        } else {
            t.clone()
        }
    };
    for c in &schema.constraints {
        let (l, r) = (lookup(&c.left), lookup(&c.right));
        if (l == r) != c.equal {
            return Err(ParamDiagnostic::ConstraintViolated {
                left: l,
                right: r,
                must_be_equal: c.equal,
            });
        }
    }
    Ok(instantiate_unchecked(schema, binding))
}

/// Instantiates without any checks; `binding` must cover every parameter.
pub fn instantiate_unchecked(schema: &ActionModel, binding: Vec<(String, String)>) -> GroundAction {
    let precondition = schema
        .precondition
        .iter()
        .map(|l| Literal {
            positive: l.positive,
            atom: substitute(&l.atom, &binding),
        })
        .collect();
    let add = schema.add_list().map(|a| substitute(a, &binding)).collect();
    let del = schema.del_list().map(|a| substitute(a, &binding)).collect();
    GroundAction {
        schema: schema.name.clone(),
        binding,
        precondition,
        add,
        del,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Applicability {
    pub applicable: bool,
    #[serde(with = "literal_strings")]
    pub unmet: Vec<Literal>,
}

/// Lists every positive precondition absent from `s` and every negative
/// precondition present in `s`, in declaration order.
pub fn applicability(s: &State, a: &GroundAction) -> Applicability {
    let mut unmet: Vec<Literal> = Vec::new();
    for l in &a.precondition {
        if !s.holds(l) && !unmet.contains(l) {
            unmet.push(l.clone());
        }
    }
    Applicability {
        applicable: unmet.is_empty(),
        unmet,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("action {action} is not applicable; unmet: {}", .unmet.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" "))]
pub struct NotApplicable {
    pub action: String,
    pub unmet: Vec<Literal>,
}

/// `(s \ del) ∪ add`.
pub fn apply(s: &State, a: &GroundAction) -> Result<State, NotApplicable> {
    let app = applicability(s, a);
    if !app.applicable {
        return Err(NotApplicable {
            action: a.to_string(),
            unmet: app.unmet,
        });
    }
    Ok(apply_unchecked(s, a))
}

pub fn apply_unchecked(s: &State, a: &GroundAction) -> State {
    let mut facts = s.facts.clone();
    for d in &a.del {
        facts.remove(d);
    }
    for ad in &a.add {
        facts.insert(ad.clone());
    }
    State { facts }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalCheck {
    pub satisfied: bool,
    #[serde(with = "literal_strings")]
    pub unmet: Vec<Literal>,
}

pub fn check_goal(s: &State, goal: &[Literal]) -> GoalCheck {
    let mut unmet: Vec<Literal> = Vec::new();
    for l in goal {
        if !s.holds(l) && !unmet.contains(l) {
            unmet.push(l.clone());
        }
    }
    GoalCheck {
        satisfied: unmet.is_empty(),
        unmet,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Valid,
    Invalid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureKind {
    UnmetPrecondition,
    InvalidParameter,
    UnmetGoal,
}

impl FailureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureKind::UnmetPrecondition => "unmet-precondition",
            FailureKind::InvalidParameter => "invalid-parameter",
            FailureKind::UnmetGoal => "unmet-goal",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    /// 1-based plan step; `None` for goal failures, which belong to no step.
    pub step: Option<usize>,
    pub kind: FailureKind,
    #[serde(with = "literal_strings")]
    pub unmet: Vec<Literal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<ParamDiagnostic>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub verdict: Verdict,
    pub failures: Vec<Failure>,
    /// Steps (1-based) after the first failing step; never simulated.
    pub not_evaluated: Vec<usize>,
    /// Present when every step was executed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_state: Option<State>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.verdict == Verdict::Valid
    }

    pub fn first_failure(&self) -> Option<&Failure> {
        self.failures.first()
    }
}

/// Simulates `plan` from the initial state. Simulation halts at the first
/// step that cannot be bound or applied; the goal is checked only when every
/// step executed.
pub fn validate_plan(d: &DomainModel, p: &ProblemSpec, plan: &Plan) -> ValidationReport {
    validate_plan_against(d, p, plan, &p.goal)
}

pub fn validate_plan_against(
    d: &DomainModel,
    p: &ProblemSpec,
    plan: &Plan,
    goal: &[Literal],
) -> ValidationReport {
    let mut state = State::initial(p);
    let n = plan.len();
    for (i, step) in plan.steps.iter().enumerate() {
        let rest = || (i + 2..=n).collect::<Vec<_>>();
        let grounded = match d.action(&step.action) {
            None => Err(ParamDiagnostic::UnknownAction {
                action: step.action.clone(),
            }),
            Some(schema) => ground_action(schema, &step.args, d, p),
        };
        let ga = match grounded {
            Ok(ga) => ga,
            Err(diag) => {
                return ValidationReport {
                    verdict: Verdict::Invalid,
                    failures: vec![Failure {
                        step: Some(i + 1),
                        kind: FailureKind::InvalidParameter,
                        unmet: Vec::new(),
                        detail: Some(diag),
                    }],
                    not_evaluated: rest(),
                    final_state: None,
                }
            }
        };
        match apply(&state, &ga) {
            Ok(next) => state = next,
            Err(na) => {
                return ValidationReport {
                    verdict: Verdict::Invalid,
                    failures: vec![Failure {
                        step: Some(i + 1),
                        kind: FailureKind::UnmetPrecondition,
                        unmet: na.unmet,
                        detail: None,
                    }],
                    not_evaluated: rest(),
                    final_state: None,
                }
            }
        }
    }
    let gc = check_goal(&state, goal);
    let failures = if gc.satisfied {
        Vec::new()
    } else {
        vec![Failure {
            step: None,
            kind: FailureKind::UnmetGoal,
            unmet: gc.unmet,
            detail: None,
        }]
    };
    ValidationReport {
        verdict: if failures.is_empty() {
            Verdict::Valid
        } else {
            Verdict::Invalid
        },
        failures,
        not_evaluated: Vec::new(),
        final_state: Some(state),
    }
}

/// Result of running a user-suggested plan through the model to find the
/// first step the model considers inexecutable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Localization {
    pub failing_step: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<FailureKind>,
    #[serde(with = "literal_strings")]
    pub unmet: Vec<Literal>,
    /// Action schemas used up to and including the failing step, first use
    /// first. When every step executes but the goal is missed, all schemas
    /// in the plan.
    pub suspect_actions: Vec<String>,
}

pub fn localize_error(d: &DomainModel, p: &ProblemSpec, suggested: &Plan) -> Localization {
    let report = validate_plan(d, p, suggested);
    let Some(f) = report.first_failure() else {
        return Localization {
            failing_step: None,
            kind: None,
            unmet: Vec::new(),
            suspect_actions: Vec::new(),
        };
    };
    let upto = f.step.unwrap_or(suggested.len());
    let mut suspects: Vec<String> = Vec::new();
    for s in &suggested.steps[..upto] {
        if d.action(&s.action).is_some() && !suspects.contains(&s.action) {
            suspects.push(s.action.clone());
        }
    }
    Localization {
        failing_step: f.step,
        kind: Some(f.kind),
        unmet: f.unmet.clone(),
        suspect_actions: suspects,
    }
}
