//! The running list of predicates shared across action constructions, with
//! the actions that introduced or used each one.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::audit::Finding;
use crate::pddl::{parse_new_predicates, DomainModel, PddlError, PredicateDef, TypeHierarchy};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateRegistry {
    entries: Vec<PredicateDef>,
    origins: BTreeMap<String, Vec<String>>,
}

/// Same name, same parameter types, same description (whitespace-insensitive).
pub fn same_definition(a: &PredicateDef, b: &PredicateDef) -> bool {
    let norm = |s: &str| s.split_whitespace().collect::<Vec<_>>().join(" ");
    a.name == b.name
        && a.params.len() == b.params.len()
        && a
            .params
            .iter()
            .zip(&b.params)
            .all(|(x, y)| x.ty.eq_ignore_ascii_case(&y.ty))
        && norm(&a.description) == norm(&b.description)
}

impl PredicateRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_domain(d: &DomainModel) -> Self {
        let mut reg = Self::new();
        for p in &d.predicates {
            reg.entries.push(p.clone());
        }
        for a in &d.actions {
            for name in a.predicates_used() {
                reg.note_use(name, &a.name);
            }
        }
        reg
    }

    pub fn entries(&self) -> &[PredicateDef] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&PredicateDef> {
        self.entries.iter().find(|p| p.name == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.get(name).is_some()
    }

    pub fn origins(&self, name: &str) -> &[String] {
        self.origins.get(name).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Records that `action` uses `predicate`.
    pub fn note_use(&mut self, predicate: &str, action: &str) {
        let list = self.origins.entry(predicate.to_string()).or_default();
        if !list.iter().any(|a| a == action) {
            list.push(action.to_string());
        }
    }

    /// Appends predicates with new names. Name collisions with object types
    /// or with differently defined existing predicates are not merged; they
    /// are returned as findings. Re-listing an identical definition is a
    /// no-op apart from recording the origin.
    pub fn merge(&mut self, new: &[PredicateDef], action: &str, h: &TypeHierarchy) -> Vec<Finding> {
        let mut findings = Vec::new();
        for p in new {
            if let Some(ty) = h.resolve(&p.name) {
                findings.push(Finding::type_name_clash(Some(action), p, ty));
                continue;
            }
            match self.get(&p.name) {
                Some(existing) if same_definition(existing, p) => {}
                Some(existing) => {
                    findings.push(Finding::predicate_name_clash(Some(action), p, existing));
                    continue;
                }
                None => {
                    let mut p = p.clone();
                    for prm in &mut p.params {
                        if let Some(t) = h.resolve(&prm.ty) {
                            prm.ty = t.to_string();
                        }
                    }
                    self.entries.push(p);
                }
            }
            self.note_use(&p.name, action);
        }
        findings
    }

    /// Replaces the definition of an existing predicate. Only feedback
    /// revisions call this.
    pub fn revise(&mut self, def: PredicateDef) -> bool {
        match self.entries.iter_mut().find(|p| p.name == def.name) {
            Some(slot) => {
                *slot = def;
                true
            }
            None => false,
        }
    }

    /// Lines of the form `- (name ?x - type): description` for prompts.
    pub fn render_for_prompt(&self) -> String {
        if self.entries.is_empty() {
            return "None".to_string();
        }
        self.entries
            .iter()
            .map(|p| format!("- {}: {}", p.signature(), p.description))
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// Text form stored as `predicates.txt`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for p in &self.entries {
            out.push_str(&format!("{}: {}", p.signature(), one_line(&p.description)));
            let used = self.origins(&p.name);
            if !used.is_empty() {
                out.push_str(&format!("  ; actions: {}", used.join(", ")));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, (usize, PddlError)> {
        let mut reg = Self::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (def, used) = match line.rsplit_once("  ; actions: ") {
                Some((d, u)) => (d, Some(u)),
                None => (line, None),
            };
            let mut parsed = parse_new_predicates(def).map_err(|e| (i + 1, e))?;
            if parsed.len() != 1 {
                return Err((
                    i + 1,
                    PddlError::syntax(i + 1, 1, line, "expected one predicate definition"),
                ));
            }
            let p = parsed.remove(0);
            if let Some(u) = used {
                for a in u.split(',').map(str::trim).filter(|a| !a.is_empty()) {
                    reg.note_use(&p.name, a);
                }
            }
            reg.entries.push(p);
        }
        Ok(reg)
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::FindingKind;
    use crate::pddl::Param;

    fn hier() -> TypeHierarchy {
        TypeHierarchy::from_pairs([
            ("householdObject", "object"),
            ("smallReceptacle", "householdObject"),
        ])
        .unwrap()
    }

    fn pd(name: &str, ty: &str, desc: &str) -> PredicateDef {
        PredicateDef::new(name, vec![Param::new("?z", ty)], desc)
    }

    #[test]
    fn disjoint_names_concatenate() {
        let mut r = PredicateRegistry::new();
        assert!(r.merge(&[pd("a", "householdObject", "a")], "x", &hier()).is_empty());
        assert!(r.merge(&[pd("b", "householdObject", "b")], "y", &hier()).is_empty());
        let names: Vec<_> = r.entries().iter().map(|p| p.name.as_str()).collect();
        assert_eq!(names, vec!["a", "b"]);
    }

    #[test]
    fn collisions_are_findings() {
        let mut r = PredicateRegistry::new();
        r.merge(&[pd("cutting-board", "householdObject", "true if the object ?z is a cutting board")], "a", &hier());
        let f = r.merge(
            &[pd("cutting-board", "smallReceptacle", "true if the small receptacle ?z is a cutting board")],
            "b",
            &hier(),
        );
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].kind, FindingKind::PredicateNameClash);
        assert_eq!(r.len(), 1);
        let f = r.merge(&[pd("smallreceptacle", "householdObject", "x")], "b", &hier());
        assert_eq!(f[0].kind, FindingKind::TypeNameClash);
    }

    #[test]
    fn text_round_trip() {
        let mut r = PredicateRegistry::new();
        r.merge(&[pd("a", "smallReceptacle", "true if ?z is fine")], "open", &hier());
        r.note_use("a", "close");
        let back = PredicateRegistry::from_text(&r.to_text()).unwrap();
        assert_eq!(back, r);
    }
}
