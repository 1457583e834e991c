//! Prompt and feedback templates. Defaults are compiled in; a project's
//! `templates/` directory may override any of them by id.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::llm::{LlmError, PromptTemplate};

struct Spec {
    id: &'static str,
    slots: &'static [&'static str],
    default: &'static str,
}

macro_rules! spec {
    ($id:literal, [$($slot:literal),*]) => {
        Spec {
            id: $id,
            slots: &[$($slot),*],
            default: include_str!(concat!("../templates/", $id, ".txt")),
        }
    };
}

const SPECS: &[Spec] = &[
    spec!("construct-action", [
        "demonstrations", "domain_description", "types", "action_name",
        "action_description", "extra_info", "predicates"
    ]),
    spec!("blocksworld-demos", []),
    spec!("goal-translation", ["domain_description", "predicates", "objects", "instruction"]),
    spec!("llm-planner", ["domain_description", "actions", "examples", "problem", "instruction"]),
    spec!("action-translation", ["actions", "step"]),
    spec!("feedback-parse-error", ["error"]),
    spec!("feedback-unsupported-keyword", ["keyword"]),
    spec!("feedback-type-name-clash", ["items"]),
    spec!("feedback-predicate-name-clash", ["items"]),
    spec!("feedback-invalid-object-type", ["type", "param"]),
    spec!("feedback-predicate-usage", ["problem"]),
    spec!("feedback-contradictory-effects", ["action", "atom"]),
    spec!("feedback-redundant-precondition", ["action", "literal"]),
    spec!("validation-unmet-precondition", ["step", "unmet"]),
    spec!("validation-unmet-goal", ["unmet"]),
    spec!("validation-invalid-parameter", ["step", "problem"]),
    spec!("plan-format-error", ["step"]),
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TemplateSet {
    map: BTreeMap<String, PromptTemplate>,
}

impl Default for TemplateSet {
    fn default() -> Self {
        Self::defaults()
    }
}

fn make(spec: &Spec, body: &str) -> Result<PromptTemplate, LlmError> {
    // files end with a newline that is not part of the message
    PromptTemplate::with_slots(spec.id, body.trim_end_matches(['\n', '\r']), spec.slots)
}

impl TemplateSet {
    pub fn defaults() -> Self {
        let map = SPECS
            .iter()
            .map(|s| {
                let t = make(s, s.default).expect("built-in templates are well formed");
                (s.id.to_string(), t)
            })
            .collect();
        Self { map }
    }

    /// Shared copy of the defaults.
    pub fn builtin() -> &'static TemplateSet {
        static SET: std::sync::OnceLock<TemplateSet> = std::sync::OnceLock::new();
        SET.get_or_init(Self::defaults)
    }

    pub fn ids() -> impl Iterator<Item = &'static str> {
        SPECS.iter().map(|s| s.id)
    }

    /// Defaults overridden by `dir/<id>.txt` where present. Unknown files
    /// are ignored; overrides using slots the template does not define are
    /// rejected.
    pub fn load_dir(dir: &Path) -> Result<Self, LlmError> {
        let mut set = Self::defaults();
        for s in SPECS {
            let path = dir.join(format!("{}.txt", s.id));
            if path.is_file() {
                let body = fs::read_to_string(&path)?;
                set.map.insert(s.id.to_string(), make(s, &body)?);
            }
        }
        Ok(set)
    }

    /// Writes every template into `dir`, leaving existing files untouched.
    pub fn write_missing(&self, dir: &Path) -> Result<(), LlmError> {
        fs::create_dir_all(dir)?;
        for (id, t) in &self.map {
            let path = dir.join(format!("{id}.txt"));
            if !path.exists() {
                fs::write(&path, format!("{}\n", t.body))?;
            }
        }
        Ok(())
    }

    pub fn get(&self, id: &str) -> &PromptTemplate {
        self.map
            .get(id)
            .unwrap_or_else(|| panic!("no template with id '{id}'"))
    }

    pub fn render(&self, id: &str, bindings: &BTreeMap<&str, String>) -> Result<String, LlmError> {
        self.get(id).render(bindings)
    }

    /// Renders a template whose slots are all bound by `pairs`; the built-in
    /// feedback templates cannot fail this way.
    pub fn fill(&self, id: &str, pairs: &[(&str, &str)]) -> String {
        let b: BTreeMap<&str, String> = pairs.iter().map(|(k, v)| (*k, v.to_string())).collect();
        match self.render(id, &b) {
            Ok(s) => s,
            Err(e) => {
                log::error!("template {id}: {e}");
                String::new()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_load() {
        let t = TemplateSet::defaults();
        assert_eq!(TemplateSet::ids().count(), SPECS.len());
        assert!(t.get("construct-action").used_slots().contains(&"predicates"));
    }

    #[test]
    fn override_from_dir() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("plan-format-error.txt"), "bad step {{step}}\n").unwrap();
        let t = TemplateSet::load_dir(dir.path()).unwrap();
        assert_eq!(t.fill("plan-format-error", &[("step", "3")]), "bad step 3");
        fs::write(dir.path().join("plan-format-error.txt"), "{{nope}}").unwrap();
        assert!(matches!(
            TemplateSet::load_dir(dir.path()),
            Err(LlmError::UnknownSlot { .. })
        ));
    }
}
