//! Deterministic model auditing. Each finding carries the natural-language
//! feedback message sent back to the model that wrote the action.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::pddl::{
    is_variable, ordinal, ActionModel, Atom, DomainModel, Literal, PredicateDef, Section, TypeHierarchy,
};
use crate::registry::{same_definition, PredicateRegistry};
use crate::templates::TemplateSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FindingKind {
    UnsupportedKeyword,
    TypeNameClash,
    PredicateNameClash,
    InvalidObjectType,
    PredicateUsageMismatch,
    ContradictoryEffects,
    /// Informational; only reported when enabled.
    RedundantPrecondition,
}

impl FindingKind {
    pub const ALL: [FindingKind; 7] = [
        FindingKind::UnsupportedKeyword,
        FindingKind::TypeNameClash,
        FindingKind::PredicateNameClash,
        FindingKind::InvalidObjectType,
        FindingKind::PredicateUsageMismatch,
        FindingKind::ContradictoryEffects,
        FindingKind::RedundantPrecondition,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FindingKind::UnsupportedKeyword => "unsupported-keyword",
            FindingKind::TypeNameClash => "type-name-clash",
            FindingKind::PredicateNameClash => "predicate-name-clash",
            FindingKind::InvalidObjectType => "invalid-object-type",
            FindingKind::PredicateUsageMismatch => "predicate-usage-mismatch",
            FindingKind::ContradictoryEffects => "contradictory-effects",
            FindingKind::RedundantPrecondition => "redundant-precondition",
        }
    }

    fn template(self) -> &'static str {
        match self {
            FindingKind::UnsupportedKeyword => "feedback-unsupported-keyword",
            FindingKind::TypeNameClash => "feedback-type-name-clash",
            FindingKind::PredicateNameClash => "feedback-predicate-name-clash",
            FindingKind::InvalidObjectType => "feedback-invalid-object-type",
            FindingKind::PredicateUsageMismatch => "feedback-predicate-usage",
            FindingKind::ContradictoryEffects => "feedback-contradictory-effects",
            FindingKind::RedundantPrecondition => "feedback-redundant-precondition",
        }
    }

    /// Kinds whose messages list several offenders in one numbered list.
    fn is_listed(self) -> bool {
        matches!(self, FindingKind::TypeNameClash | FindingKind::PredicateNameClash)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Locus {
    /// `None` for findings about the domain's predicate list itself.
    pub action: Option<String>,
    pub section: Section,
    pub snippet: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub kind: FindingKind,
    pub locus: Locus,
    /// Template slot values; listed kinds use `item`.
    pub slots: BTreeMap<String, String>,
    pub message: String,
}

impl Finding {
    fn new(kind: FindingKind, action: Option<&str>, section: Section, snippet: String, slots: &[(&str, String)]) -> Self {
        let mut f = Finding {
            kind,
            locus: Locus {
                action: action.map(str::to_string),
                section,
                snippet,
            },
            slots: slots.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            message: String::new(),
        };
        f.message = render_feedback_with(std::slice::from_ref(&f), TemplateSet::builtin());
        f
    }

    pub fn unsupported_keyword(action: &str, section: Section, keyword: &str, snippet: &str) -> Self {
        Self::new(
            FindingKind::UnsupportedKeyword,
            Some(action),
            section,
            snippet.to_string(),
            &[("keyword", keyword.to_string())],
        )
    }

    /// `type_name` is the declared spelling of the clashing type.
    pub fn type_name_clash(action: Option<&str>, pred: &PredicateDef, type_name: &str) -> Self {
        let section = if action.is_some() { Section::NewPredicates } else { Section::Predicates };
        Self::new(
            FindingKind::TypeNameClash,
            action,
            section,
            pred.signature(),
            &[("item", format!("'{type_name}'"))],
        )
    }

    pub fn predicate_name_clash(action: Option<&str>, new: &PredicateDef, existing: &PredicateDef) -> Self {
        let section = if action.is_some() { Section::NewPredicates } else { Section::Predicates };
        let item = format!(
            "{}, {} | existing predicate with the same name: {}, {}",
            new.signature(),
            new.description,
            existing.signature(),
            existing.description
        );
        Self::new(FindingKind::PredicateNameClash, action, section, new.signature(), &[("item", item)])
    }

    pub fn invalid_object_type(action: Option<&str>, section: Section, ty: &str, param: &str, snippet: String) -> Self {
        Self::new(
            FindingKind::InvalidObjectType,
            action,
            section,
            snippet,
            &[("type", ty.to_string()), ("param", param.to_string())],
        )
    }

    pub fn usage(action: &str, section: Section, problem: String, snippet: String) -> Self {
        Self::new(
            FindingKind::PredicateUsageMismatch,
            Some(action),
            section,
            snippet,
            &[("problem", problem)],
        )
    }

    pub fn contradictory(action: &str, atom: &Atom) -> Self {
        Self::new(
            FindingKind::ContradictoryEffects,
            Some(action),
            Section::Effects,
            atom.to_string(),
            &[("action", action.to_string()), ("atom", atom.to_string())],
        )
    }

    pub fn redundant(action: &str, lit: &Literal) -> Self {
        Self::new(
            FindingKind::RedundantPrecondition,
            Some(action),
            Section::Preconditions,
            lit.to_string(),
            &[("action", action.to_string()), ("literal", lit.to_string())],
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub findings: Vec<Finding>,
    pub clean: bool,
}

impl AuditReport {
    fn from_findings(findings: Vec<Finding>) -> Self {
        Self {
            clean: findings.is_empty(),
            findings,
        }
    }

    pub fn of_kind(&self, kind: FindingKind) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(move |f| f.kind == kind)
    }

    pub fn for_action<'a>(&'a self, action: &'a str) -> impl Iterator<Item = &'a Finding> {
        self.findings
            .iter()
            .filter(move |f| f.locus.action.as_deref() == Some(action))
    }

    /// Feedback text for the whole report, rendered with default templates.
    pub fn feedback(&self) -> String {
        render_feedback(&self.findings)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AuditConfig {
    pub redundant_preconditions: bool,
}

/// Audits one action as produced in a construction reply, against the
/// registry as it stood before the reply.
pub fn audit_action(
    model: &ActionModel,
    new_predicates: &[PredicateDef],
    reg: &PredicateRegistry,
    h: &TypeHierarchy,
    cfg: AuditConfig,
) -> AuditReport {
    AuditReport::from_findings(action_findings(model, new_predicates, reg, h, cfg))
}

/// Audits a whole domain: the predicate list, then every action in
/// declaration order.
pub fn audit_domain(d: &DomainModel, cfg: AuditConfig) -> AuditReport {
    let h = &d.types;
    let mut findings = Vec::new();
    let mut seen: Vec<&PredicateDef> = Vec::new();
    for p in &d.predicates {
        if let Some(ty) = h.resolve(&p.name) {
            findings.push(Finding::type_name_clash(None, p, ty));
        }
        if let Some(prev) = seen.iter().find(|q| q.name == p.name) {
            if !same_definition(prev, p) {
                findings.push(Finding::predicate_name_clash(None, p, prev));
            }
        } else {
            seen.push(p);
        }
        for prm in &p.params {
            if !h.contains(&prm.ty) {
                findings.push(Finding::invalid_object_type(
                    None,
                    Section::Predicates,
                    &prm.ty,
                    &prm.name,
                    p.signature(),
                ));
            }
        }
    }
    let reg = PredicateRegistry::from_domain(d);
    for a in &d.actions {
        findings.extend(action_findings(a, &[], &reg, h, cfg));
    }
    AuditReport::from_findings(findings)
}

fn action_findings(
    model: &ActionModel,
    new_predicates: &[PredicateDef],
    reg: &PredicateRegistry,
    h: &TypeHierarchy,
    cfg: AuditConfig,
) -> Vec<Finding> {
    let name = model.name.as_str();
    let mut out = Vec::new();

    for u in &model.unsupported {
        out.push(Finding::unsupported_keyword(name, u.section, &u.keyword, &u.snippet));
    }

    for p in new_predicates {
        if let Some(ty) = h.resolve(&p.name) {
            out.push(Finding::type_name_clash(Some(name), p, ty));
        }
    }
    for p in new_predicates {
        if h.resolve(&p.name).is_some() {
            continue;
        }
        if let Some(existing) = reg.get(&p.name) {
            if !same_definition(existing, p) {
                out.push(Finding::predicate_name_clash(Some(name), p, existing));
            }
        }
    }

    for prm in &model.params {
        if !h.contains(&prm.ty) {
            out.push(Finding::invalid_object_type(
                Some(name),
                Section::Parameters,
                &prm.ty,
                &prm.name,
                format!("{} - {}", prm.name, prm.ty),
            ));
        }
    }
    for p in new_predicates {
        for prm in &p.params {
            if !h.contains(&prm.ty) {
                out.push(Finding::invalid_object_type(
                    Some(name),
                    Section::NewPredicates,
                    &prm.ty,
                    &prm.name,
                    p.signature(),
                ));
            }
        }
    }

    let lookup = |pred: &str| -> Option<&PredicateDef> {
        reg.get(pred)
            .or_else(|| new_predicates.iter().find(|p| p.name == pred))
    };
    let mut seen_problems: Vec<String> = Vec::new();
    for (section, lit) in model.literals() {
        for problem in usage_problems(model, lit, lookup(&lit.atom.predicate), h) {
            if seen_problems.contains(&problem) {
                continue;
            }
            seen_problems.push(problem.clone());
            out.push(Finding::usage(name, section, problem, lit.to_string()));
        }
    }

    let mut contradictory: Vec<&Atom> = Vec::new();
    for a in model.add_list() {
        if model.del_list().any(|d| d == a) && !contradictory.contains(&a) {
            contradictory.push(a);
        }
    }
    for a in contradictory {
        out.push(Finding::contradictory(name, a));
    }

    if cfg.redundant_preconditions {
        let mut seen: Vec<&Literal> = Vec::new();
        for l in &model.precondition {
            let restated = l.positive && model.add_list().any(|a| *a == l.atom);
            if seen.contains(&l) || restated {
                out.push(Finding::redundant(name, l));
            }
            seen.push(l);
        }
    }
    out
}

fn usage_problems(model: &ActionModel, lit: &Literal, def: Option<&PredicateDef>, h: &TypeHierarchy) -> Vec<String> {
    let pred = &lit.atom.predicate;
    let Some(def) = def else {
        return vec![format!("the predicate '{pred}' is not defined")];
    };
    if def.arity() != lit.atom.args.len() {
        return vec![format!(
            "the predicate '{pred}' takes {} parameter(s), but {} were given",
            def.arity(),
            lit.atom.args.len()
        )];
    }
    let mut out = Vec::new();
    for (i, (arg, expected)) in lit.atom.args.iter().zip(&def.params).enumerate() {
        let Some(param) = model.param(arg).filter(|_| is_variable(arg)) else {
            out.push(format!("'{arg}' in '{pred}' is not a parameter of the action"));
            continue;
        };
        let (Some(given), Some(want)) = (h.resolve(&param.ty), h.resolve(&expected.ty)) else {
            // unknown types are reported as invalid object types
            continue;
        };
        if !h.is_subtype(given, want).unwrap_or(true) {
            out.push(format!(
                "the {} parameter of '{pred}' should be a {want}, but a {given} was given",
                ordinal(i + 1)
            ));
        }
    }
    out
}

/// Feedback text for a batch of findings using the built-in templates.
pub fn render_feedback(findings: &[Finding]) -> String {
    render_feedback_with(findings, TemplateSet::builtin())
}

/// Renders a batch. Findings of a listed kind (name clashes) are combined
/// into one numbered list; other findings get one message each. Messages
/// are separated by newlines, in order of first appearance of their kind.
pub fn render_feedback_with(findings: &[Finding], templates: &TemplateSet) -> String {
    let mut kinds: Vec<FindingKind> = Vec::new();
    for f in findings {
        if !kinds.contains(&f.kind) {
            kinds.push(f.kind);
        }
    }
    let mut parts: Vec<String> = Vec::new();
    for kind in kinds {
        let group: Vec<&Finding> = findings.iter().filter(|f| f.kind == kind).collect();
        if kind.is_listed() {
            let items = group
                .iter()
                .enumerate()
                .map(|(i, f)| format!("{}. {}", i + 1, f.slots.get("item").map(String::as_str).unwrap_or("")))
                .collect::<Vec<_>>()
                .join("; ");
            parts.push(templates.fill(kind.template(), &[("items", &items)]));
        } else {
            for f in group {
                let pairs: Vec<(&str, &str)> = f.slots.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
                parts.push(templates.fill(kind.template(), &pairs));
            }
        }
    }
    parts.join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::{parse_action_block, Param, Provenance};

    fn household() -> TypeHierarchy {
        TypeHierarchy::from_pairs([
            ("robot", "object"),
            ("furnitureAppliance", "object"),
            ("householdObject", "object"),
            ("smallReceptacle", "householdObject"),
        ])
        .unwrap()
    }

    fn reg() -> PredicateRegistry {
        let mut r = PredicateRegistry::new();
        r.merge(
            &[
                PredicateDef::new(
                    "object-on",
                    vec![Param::new("?o", "householdObject"), Param::new("?f", "furnitureAppliance")],
                    "true if the object ?o is on the furniture or appliance ?f",
                ),
                PredicateDef::new(
                    "cutting-board",
                    vec![Param::new("?z", "householdObject")],
                    "true if the object ?z is a cutting board",
                ),
            ],
            "seed",
            &household(),
        );
        r
    }

    fn block(text: &str) -> (ActionModel, Vec<PredicateDef>) {
        parse_action_block(text).unwrap().into_model("act", Provenance::Handwritten)
    }

    #[test]
    fn forall_message() {
        let (m, n) = block(
            "Parameters:\n1. ?r - robot: r\n\nPreconditions:\n```\n(and (forall (?o - householdObject) (not (object-on ?o ?o))))\n```\n\nEffects:\n```\n(and)\n```\n\nNew Predicates:\nNone\n",
        );
        let r = audit_action(&m, &n, &reg(), &household(), AuditConfig::default());
        assert_eq!(r.findings.len(), 1);
        assert!(r.findings[0]
            .message
            .starts_with("The precondition or effect contain the keyword 'forall' that is not supported"));
    }

    #[test]
    fn type_clash_message() {
        let p = PredicateDef::new("smallreceptacle", vec![Param::new("?z", "householdObject")], "x");
        let f = Finding::type_name_clash(Some("a"), &p, "smallReceptacle");
        assert_eq!(
            f.message,
            "The following predicate(s) have the same name(s) as existing object types: 1. 'smallReceptacle'. Please rename these predicates."
        );
    }

    #[test]
    fn usage_mismatch_message() {
        let (m, n) = block(
            "Parameters:\n1. ?a - householdObject: a\n2. ?b - householdObject: b\n\nPreconditions:\n```\n(and (object-on ?a ?b))\n```\n\nEffects:\n```\n(and)\n```\n\nNew Predicates:\nNone\n",
        );
        let r = audit_action(&m, &n, &reg(), &household(), AuditConfig::default());
        assert_eq!(
            r.findings[0].message,
            "There is a syntax error, the second parameter of 'object-on' should be a furnitureAppliance, but a householdObject was given. Please use the correct predicate or devise new one(s) if needed."
        );
    }

    #[test]
    fn two_clashes_are_numbered() {
        let a = Finding::type_name_clash(Some("x"), &PredicateDef::new("robot", vec![], "r"), "robot");
        let b = Finding::type_name_clash(Some("x"), &PredicateDef::new("smallreceptacle", vec![], "s"), "smallReceptacle");
        assert_eq!(
            render_feedback(&[a, b]),
            "The following predicate(s) have the same name(s) as existing object types: 1. 'robot'; 2. 'smallReceptacle'. Please rename these predicates."
        );
        assert_eq!(render_feedback(&[]), "");
    }

    #[test]
    fn contradiction_and_lint() {
        let (m, n) = block(
            "Parameters:\n1. ?a - householdObject: a\n\nPreconditions:\n```\n(and (cutting-board ?a) (cutting-board ?a))\n```\n\nEffects:\n```\n(and (cutting-board ?a) (not (cutting-board ?a)))\n```\n\nNew Predicates:\nNone\n",
        );
        let r = audit_action(&m, &n, &reg(), &household(), AuditConfig::default());
        assert_eq!(r.findings.len(), 1);
        assert_eq!(r.findings[0].kind, FindingKind::ContradictoryEffects);
        let r = audit_action(&m, &n, &reg(), &household(), AuditConfig { redundant_preconditions: true });
        assert_eq!(r.of_kind(FindingKind::RedundantPrecondition).count(), 2);
    }
}
