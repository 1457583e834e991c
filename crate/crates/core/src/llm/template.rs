use std::collections::BTreeMap;

use super::LlmError;

/// A prompt body with `{{slot}}` placeholders.
///
/// `required_slots` is the set of names the body may use. Placeholders
/// outside that set are rejected as unknown; every placeholder in the body
/// must be bound at render time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PromptTemplate {
    pub id: String,
    pub body: String,
    pub required_slots: Vec<String>,
}

/// A placeholder occurrence: byte range of `{{name}}` and the name.
fn placeholders(body: &str) -> Vec<(usize, usize, &str)> {
    let mut out = Vec::new();
    let mut from = 0;
    while let Some(open) = body[from..].find("{{") {
        let start = from + open;
        let Some(close) = body[start + 2..].find("}}") else {
            break;
        };
        let end = start + 2 + close + 2;
        let name = body[start + 2..end - 2].trim();
        let valid = !name.is_empty()
            && name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
        if valid {
            out.push((start, end, name));
            from = end;
        } else {
            from = start + 2;
        }
    }
    out
}

impl PromptTemplate {
    /// Template whose allowed slots are exactly those used in `body`.
    pub fn new(id: impl Into<String>, body: impl Into<String>) -> Self {
        let body = body.into();
        let mut slots: Vec<String> = Vec::new();
        for (_, _, name) in placeholders(&body) {
            if !slots.iter().any(|s| s == name) {
                slots.push(name.to_string());
            }
        }
        Self {
            id: id.into(),
            body,
            required_slots: slots,
        }
    }

    /// Template that may only use the given slot names.
    pub fn with_slots(id: impl Into<String>, body: impl Into<String>, slots: &[&str]) -> Result<Self, LlmError> {
        let t = Self {
            id: id.into(),
            body: body.into(),
            required_slots: slots.iter().map(|s| s.to_string()).collect(),
        };
        t.check()?;
        Ok(t)
    }

    /// Rejects placeholders not listed in `required_slots`.
    pub fn check(&self) -> Result<(), LlmError> {
        for (_, _, name) in placeholders(&self.body) {
            if !self.required_slots.iter().any(|s| s == name) {
                return Err(LlmError::UnknownSlot {
                    template: self.id.clone(),
                    slot: name.to_string(),
                });
            }
        }
        Ok(())
    }

    /// Slots actually referenced by the body.
    pub fn used_slots(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for (_, _, name) in placeholders(&self.body) {
            if !out.contains(&name) {
                out.push(name);
            }
        }
        out
    }

    /// Single-pass substitution: bound text is inserted verbatim and never
    /// re-scanned for placeholders.
    pub fn render(&self, bindings: &BTreeMap<&str, String>) -> Result<String, LlmError> {
        self.check()?;
        let mut out = String::with_capacity(self.body.len());
        let mut last = 0;
        for (start, end, name) in placeholders(&self.body) {
            let value = bindings.get(name).ok_or_else(|| LlmError::UnboundSlot {
                template: self.id.clone(),
                slot: name.to_string(),
            })?;
            out.push_str(&self.body[last..start]);
            out.push_str(value);
            last = end;
        }
        out.push_str(&self.body[last..]);
        Ok(out)
    }
}

/// Convenience for building bindings inline.
pub fn bindings<'a, I, V>(pairs: I) -> BTreeMap<&'a str, String>
where
    I: IntoIterator<Item = (&'a str, V)>,
    V: Into<String>,
{
    pairs.into_iter().map(|(k, v)| (k, v.into())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_slots_is_identity() {
        let t = PromptTemplate::new("plain", "Hello {world}.");
        assert_eq!(t.render(&BTreeMap::new()).unwrap(), "Hello {world}.");
    }

    #[test]
    fn substitution_is_single_pass() {
        let t = PromptTemplate::new("x", "A={{a}} B={{ b }}");
        let out = t
            .render(&bindings([("a", "{{b}}"), ("b", "2")]))
            .unwrap();
        assert_eq!(out, "A={{b}} B=2");
    }

    #[test]
    fn unbound_and_unknown() {
        let t = PromptTemplate::new("x", "{{a}} {{b}}");
        assert!(matches!(
            t.render(&bindings([("a", "1")])),
            Err(LlmError::UnboundSlot { slot, .. }) if slot == "b"
        ));
        assert!(matches!(
            PromptTemplate::with_slots("y", "{{a}} {{zz}}", &["a"]),
            Err(LlmError::UnknownSlot { slot, .. }) if slot == "zz"
        ));
    }
}
