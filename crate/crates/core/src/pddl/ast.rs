use std::fmt;

use serde::{Deserialize, Serialize};

use super::error::PddlError;

/// Implicit root of every type hierarchy.
pub const ROOT_TYPE: &str = "object";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeDecl {
    pub name: String,
    pub parent: String,
}

/// Single-inheritance type forest rooted at `object`.
///
/// Type names keep the spelling they were declared with (`smallReceptacle`,
/// `furnitureAppliance`) because they are echoed verbatim in feedback
/// messages. Every lookup is case-insensitive.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeHierarchy {
    decls: Vec<TypeDecl>,
}

impl TypeHierarchy {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a hierarchy from `(name, parent)` pairs in declaration order.
    ///
    /// Parents that are mentioned but never declared are added as direct
    /// children of `object`, right after the last declaration.
    pub fn from_pairs<I, S, T>(pairs: I) -> Result<Self, PddlError>
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: Into<String>,
    {
        let pairs: Vec<(String, String)> = pairs
            .into_iter()
            .map(|(n, p)| (n.into(), p.into()))
            .collect();
        let mut h = TypeHierarchy::new();
        for (name, _) in &pairs {
            if name.eq_ignore_ascii_case(ROOT_TYPE) {
                continue;
            }
            if h.resolve(name).is_some() {
                return Err(PddlError::DuplicateName {
                    kind: "type",
                    name: name.clone(),
                });
            }
            h.decls.push(TypeDecl {
                name: name.clone(),
                parent: ROOT_TYPE.to_string(),
            });
        }
        let mut implicit = Vec::new();
        for (name, parent) in &pairs {
            if name.eq_ignore_ascii_case(ROOT_TYPE) {
                continue;
            }
            let parent = match h.resolve(parent) {
                Some(p) => p.to_string(),
                None if parent.eq_ignore_ascii_case(ROOT_TYPE) => ROOT_TYPE.to_string(),
                None => {
                    if !implicit.iter().any(|p: &String| p.eq_ignore_ascii_case(parent)) {
                        implicit.push(parent.clone());
                    }
                    parent.clone()
                }
            };
            let idx = h.index_of(name).expect("declared above");
            h.decls[idx].parent = parent;
        }
        for p in implicit {
            h.decls.push(TypeDecl {
                name: p,
                parent: ROOT_TYPE.to_string(),
            });
        }
        h.check_acyclic()?;
        Ok(h)
    }

    /// Declares `name` as a child of the already declared `parent`.
    pub fn declare(&mut self, name: &str, parent: &str) -> Result<(), PddlError> {
        if name.eq_ignore_ascii_case(ROOT_TYPE) || self.resolve(name).is_some() {
            return Err(PddlError::DuplicateName {
                kind: "type",
                name: name.to_string(),
            });
        }
        let parent = self
            .resolve(parent)
            .ok_or_else(|| PddlError::UnknownType(parent.to_string()))?
            .to_string();
        self.decls.push(TypeDecl {
            name: name.to_string(),
            parent,
        });
        Ok(())
    }

    fn index_of(&self, name: &str) -> Option<usize> {
        self.decls
            .iter()
            .position(|d| d.name.eq_ignore_ascii_case(name))
    }

    fn check_acyclic(&self) -> Result<(), PddlError> {
        for d in &self.decls {
            let mut cur = d.parent.as_str();
            let mut steps = 0;
            while !cur.eq_ignore_ascii_case(ROOT_TYPE) {
                if cur.eq_ignore_ascii_case(&d.name) || steps > self.decls.len() {
                    return Err(PddlError::CyclicTypes(d.name.clone()));
                }
                cur = match self.index_of(cur) {
                    Some(i) => &self.decls[i].parent,
                    None => return Err(PddlError::UnknownType(cur.to_string())),
                };
                steps += 1;
            }
        }
        Ok(())
    }

    /// Canonical spelling of a declared type (including `object`).
    pub fn resolve(&self, name: &str) -> Option<&str> {
        if name.eq_ignore_ascii_case(ROOT_TYPE) {
            return Some(ROOT_TYPE);
        }
        self.index_of(name).map(|i| self.decls[i].name.as_str())
    }

    pub fn contains(&self, name: &str) -> bool {
        self.resolve(name).is_some()
    }

    pub fn parent(&self, name: &str) -> Option<&str> {
        self.index_of(name).map(|i| self.decls[i].parent.as_str())
    }

    /// Declared types, excluding the implicit root.
    pub fn decls(&self) -> &[TypeDecl] {
        &self.decls
    }

    pub fn is_empty(&self) -> bool {
        self.decls.is_empty()
    }

    /// Reflexive-transitive ancestry test: is `sub` equal to or below `sup`?
    pub fn is_subtype(&self, sub: &str, sup: &str) -> Result<bool, PddlError> {
        let sup = self
            .resolve(sup)
            .ok_or_else(|| PddlError::UnknownType(sup.to_string()))?;
        let mut cur = self
            .resolve(sub)
            .ok_or_else(|| PddlError::UnknownType(sub.to_string()))?;
        loop {
            if cur == sup {
                return Ok(true);
            }
            match self.parent(cur) {
                Some(p) => cur = p,
                None => return Ok(false),
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Param {
    /// Variable name including the leading `?`.
    pub name: String,
    #[serde(rename = "type")]
    pub ty: String,
    /// Role of the parameter in natural language, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

impl Param {
    pub fn new(name: impl Into<String>, ty: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ty: ty.into(),
            description: None,
        }
    }

    pub fn described(mut self, description: impl Into<String>) -> Self {
        self.description = Some(description.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateDef {
    pub name: String,
    pub params: Vec<Param>,
    #[serde(default)]
    pub description: String,
}

impl PredicateDef {
    pub fn new(name: impl Into<String>, params: Vec<Param>, description: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            params,
            description: description.into(),
        }
    }

    pub fn arity(&self) -> usize {
        self.params.len()
    }

    /// `(name ?x - t ...)`
    pub fn signature(&self) -> String {
        let mut s = format!("({}", self.name);
        for p in &self.params {
            s.push_str(&format!(" {} - {}", p.name, p.ty));
        }
        s.push(')');
        s
    }
}

/// A predicate applied to terms: variables (`?x`) or object names.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl Atom {
    pub fn new<I, S>(predicate: impl Into<String>, args: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            predicate: predicate.into(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }

    pub fn is_ground(&self) -> bool {
        !self.args.iter().any(|a| is_variable(a))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub positive: bool,
    pub atom: Atom,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Self {
            positive: true,
            atom,
        }
    }

    pub fn neg(atom: Atom) -> Self {
        Self {
            positive: false,
            atom,
        }
    }

    pub fn negated(&self) -> Self {
        Self {
            positive: !self.positive,
            atom: self.atom.clone(),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.atom)
        } else {
            write!(f, "(not {})", self.atom)
        }
    }
}

/// `(= ?a ?b)` or `(not (= ?a ?b))` between two action parameters.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParamConstraint {
    pub left: String,
    pub right: String,
    pub equal: bool,
}

impl fmt::Display for ParamConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.equal {
            write!(f, "(= {} {})", self.left, self.right)
        } else {
            write!(f, "(not (= {} {}))", self.left, self.right)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Section {
    Parameters,
    Preconditions,
    Effects,
    NewPredicates,
    Predicates,
    Goal,
}

impl Section {
    pub fn label(self) -> &'static str {
        match self {
            Section::Parameters => "Parameters",
            Section::Preconditions => "Preconditions",
            Section::Effects => "Effects",
            Section::NewPredicates => "New Predicates",
            Section::Predicates => "Predicates",
            Section::Goal => "Goal",
        }
    }
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A formula outside the supported fragment, kept verbatim so the auditor
/// can report it back to the model that wrote it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnsupportedConstruct {
    pub keyword: String,
    pub section: Section,
    pub snippet: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    #[default]
    Handwritten,
    Message { conversation: String, index: usize },
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Handwritten => f.write_str("handwritten"),
            Provenance::Message {
                conversation,
                index,
            } => write!(f, "{conversation}#{index}"),
        }
    }
}

impl Provenance {
    pub fn parse(s: &str) -> Provenance {
        let s = s.trim();
        if let Some((conv, idx)) = s.rsplit_once('#') {
            if let Ok(index) = idx.parse() {
                return Provenance::Message {
                    conversation: conv.to_string(),
                    index,
                };
            }
        }
        Provenance::Handwritten
    }
}

/// One lifted action: parameters, conjunctive precondition, and ordered
/// effects (positive literals are the add list, negative ones the delete list).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionModel {
    pub name: String,
    pub params: Vec<Param>,
    pub precondition: Vec<Literal>,
    #[serde(default)]
    pub constraints: Vec<ParamConstraint>,
    pub effects: Vec<Literal>,
    #[serde(default)]
    pub unsupported: Vec<UnsupportedConstruct>,
    #[serde(default)]
    pub provenance: Provenance,
}

impl ActionModel {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            params: Vec::new(),
            precondition: Vec::new(),
            constraints: Vec::new(),
            effects: Vec::new(),
            unsupported: Vec::new(),
            provenance: Provenance::Handwritten,
        }
    }

    pub fn add_list(&self) -> impl Iterator<Item = &Atom> {
        self.effects.iter().filter(|l| l.positive).map(|l| &l.atom)
    }

    pub fn del_list(&self) -> impl Iterator<Item = &Atom> {
        self.effects.iter().filter(|l| !l.positive).map(|l| &l.atom)
    }

    pub fn param(&self, var: &str) -> Option<&Param> {
        self.params.iter().find(|p| p.name == var)
    }

    /// Every literal of the action with the section it occurs in.
    pub fn literals(&self) -> impl Iterator<Item = (Section, &Literal)> {
        self.precondition
            .iter()
            .map(|l| (Section::Preconditions, l))
            .chain(self.effects.iter().map(|l| (Section::Effects, l)))
    }

    /// Predicate names referenced anywhere in the action, first use first.
    pub fn predicates_used(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for (_, l) in self.literals() {
            if !out.contains(&l.atom.predicate.as_str()) {
                out.push(&l.atom.predicate);
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainModel {
    pub name: String,
    pub types: TypeHierarchy,
    pub predicates: Vec<PredicateDef>,
    pub actions: Vec<ActionModel>,
}

impl DomainModel {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            types: TypeHierarchy::new(),
            predicates: Vec::new(),
            actions: Vec::new(),
        }
    }

    pub fn predicate(&self, name: &str) -> Option<&PredicateDef> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn action(&self, name: &str) -> Option<&ActionModel> {
        self.actions.iter().find(|a| a.name == name)
    }

    pub fn action_mut(&mut self, name: &str) -> Option<&mut ActionModel> {
        self.actions.iter_mut().find(|a| a.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectDecl {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: String,
}

impl ObjectDecl {
    pub fn new(name: impl Into<String>, ty: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ty: ty.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub name: String,
    pub domain: String,
    pub objects: Vec<ObjectDecl>,
    pub init: Vec<Atom>,
    pub goal: Vec<Literal>,
}

impl ProblemSpec {
    pub fn new(name: impl Into<String>, domain: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            domain: domain.into(),
            objects: Vec::new(),
            init: Vec::new(),
            goal: Vec::new(),
        }
    }

    pub fn object_type(&self, name: &str) -> Option<&str> {
        self.objects
            .iter()
            .find(|o| o.name == name)
            .map(|o| o.ty.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PlanStep {
    pub action: String,
    pub args: Vec<String>,
}

impl PlanStep {
    pub fn new<I, S>(action: impl Into<String>, args: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            action: action.into(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }
}

impl fmt::Display for PlanStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.action)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Plan {
    pub steps: Vec<PlanStep>,
}

impl Plan {
    pub fn new(steps: Vec<PlanStep>) -> Self {
        Self { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

pub fn is_variable(term: &str) -> bool {
    term.starts_with('?')
}

/// Lowercases an identifier. PDDL is case-insensitive; language-model
/// output is not consistent about casing.
pub fn normalize_ident(s: &str) -> String {
    s.trim().to_lowercase()
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}
