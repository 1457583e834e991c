//! Deterministic natural-language rendering of literals and action models
//! from predicate descriptions.

use crate::pddl::{is_variable, ActionModel, Literal, PredicateDef};
use crate::registry::PredicateRegistry;

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum NlError {
    #[error("predicate '{0}' has no description")]
    MissingDescription(String),
}

/// How a literal is phrased.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mood {
    /// "the robot is holding b1" / "the robot is not holding b1"
    Fact,
    /// "the robot must be holding ?x" / "... must not be ..."
    Requirement,
    /// "the robot is holding ?x" / "... is no longer ..."
    Effect,
}

/// Replaces whole-token occurrences of each variable.
fn substitute(text: &str, pairs: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(text.len());
    let bytes = text.as_bytes();
    let mut i = 0;
    'scan: while i < text.len() {
        if bytes[i] == b'?' {
            for (var, value) in pairs {
                if text[i..].starts_with(var) {
                    let end = i + var.len();
                    let boundary = text[end..]
                        .chars()
                        .next()
                        .is_none_or(|c| !(c.is_ascii_alphanumeric() || c == '-' || c == '_'));
                    if boundary {
                        out.push_str(value);
                        i = end;
                        continue 'scan;
                    }
                }
            }
        }
        let c = text[i..].chars().next().expect("in bounds");
        out.push(c);
        i += c.len_utf8();
    }
    out
}

/// The description with the predicate's variables replaced by `args`,
/// minus a leading "true if".
pub fn clause(def: &PredicateDef, args: &[String]) -> String {
    let desc = def.description.trim().trim_end_matches('.');
    let lower = desc.to_lowercase();
    let body = if lower.starts_with("true if ") {
        &desc[8..]
    } else if lower.starts_with("true iff ") {
        &desc[9..]
    } else {
        desc
    };
    let pairs: Vec<(&str, &str)> = def
        .params
        .iter()
        .zip(args)
        .map(|(p, a)| (p.name.as_str(), a.as_str()))
        .collect();
    substitute(body.trim(), &pairs)
}

fn rephrase(clause: &str, positive: bool, mood: Mood) -> String {
    let verb = match (mood, positive) {
        (Mood::Fact, true) | (Mood::Effect, true) => return clause.to_string(),
        (Mood::Fact, false) => " is not ",
        (Mood::Requirement, true) => " must be ",
        (Mood::Requirement, false) => " must not be ",
        (Mood::Effect, false) => " is no longer ",
    };
    if let Some(i) = clause.find(" is ") {
        return format!("{}{}{}", &clause[..i], verb, &clause[i + 4..]);
    }
    let lead = match (mood, positive) {
        (Mood::Fact, false) => "it is not the case that",
        (Mood::Requirement, true) => "it must be true that",
        (Mood::Requirement, false) => "it must not be true that",
        _ => "it is no longer true that",
    };
    format!("{lead} {clause}")
}

/// Phrase for one literal; falls back to the PDDL text when the predicate
/// has no description.
pub fn describe_literal(lit: &Literal, reg: &PredicateRegistry, mood: Mood) -> String {
    match reg.get(&lit.atom.predicate).filter(|d| !d.description.trim().is_empty()) {
        Some(def) => rephrase(&clause(def, &lit.atom.args), lit.positive, mood),
        None => lit.to_string(),
    }
}

fn sentence(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => format!("{}{}.", f.to_uppercase(), c.as_str()),
        None => String::new(),
    }
}

/// Canonical text of an action for human review: one sentence per
/// parameter, precondition and effect.
pub fn render_model_nl(m: &ActionModel, reg: &PredicateRegistry) -> Result<String, NlError> {
    for (_, l) in m.literals() {
        let ok = reg
            .get(&l.atom.predicate)
            .is_some_and(|d| !d.description.trim().is_empty());
        if !ok {
            return Err(NlError::MissingDescription(l.atom.predicate.clone()));
        }
    }
    let mut out = format!("Action: {}\n", m.name);
    out.push_str("Parameters:\n");
    if m.params.is_empty() {
        out.push_str("This action has no parameters.\n");
    }
    for (i, p) in m.params.iter().enumerate() {
        match &p.description {
            Some(role) => out.push_str(&format!("{}. {} is a {}: {}.\n", i + 1, p.name, p.ty, role.trim_end_matches('.'))),
            None => out.push_str(&format!("{}. {} is a {}.\n", i + 1, p.name, p.ty)),
        }
    }
    out.push_str("Preconditions:\n");
    if m.precondition.is_empty() && m.constraints.is_empty() {
        out.push_str("This action has no preconditions.\n");
    }
    let mut n = 0;
    for l in &m.precondition {
        n += 1;
        out.push_str(&format!("{n}. {}\n", sentence(&describe_literal(l, reg, Mood::Requirement))));
    }
    for c in &m.constraints {
        n += 1;
        let text = if c.equal {
            format!("{} and {} must be the same object", c.left, c.right)
        } else {
            format!("{} and {} must be different objects", c.left, c.right)
        };
        let text = if is_variable(&c.left) { text } else { format!("the objects {text}") };
        out.push_str(&format!("{n}. {}\n", sentence(&text)));
    }
    out.push_str("Effects:\n");
    if m.effects.is_empty() {
        out.push_str("This action has no effects.\n");
    }
    for (i, l) in m.effects.iter().enumerate() {
        out.push_str(&format!("{}. {}\n", i + 1, sentence(&describe_literal(l, reg, Mood::Effect))));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::{Atom, Param, TypeHierarchy};

    fn reg() -> PredicateRegistry {
        let h = TypeHierarchy::from_pairs([("block", "object")]).unwrap();
        let mut r = PredicateRegistry::new();
        r.merge(
            &[
                PredicateDef::new(
                    "robot-holding",
                    vec![Param::new("?x", "block")],
                    "true if the robot is holding the block ?x",
                ),
                PredicateDef::new("block-clear", vec![Param::new("?x", "block")], "true if the block ?x is clear"),
            ],
            "seed",
            &h,
        );
        r
    }

    #[test]
    fn put_down_phrasing() {
        let mut m = ActionModel::new("put-down");
        m.params.push(Param::new("?b", "block").described("the block to put down"));
        m.precondition.push(Literal::pos(Atom::new("robot-holding", ["?b"])));
        m.effects.push(Literal::neg(Atom::new("robot-holding", ["?b"])));
        m.effects.push(Literal::pos(Atom::new("block-clear", ["?b"])));
        let text = render_model_nl(&m, &reg()).unwrap();
        assert!(text.contains("1. The robot must be holding the block ?b.\n"), "{text}");
        assert!(text.contains("1. The robot is no longer holding the block ?b.\n"));
        assert!(text.contains("2. The block ?b is clear.\n"));
        assert!(text.contains("1. ?b is a block: the block to put down.\n"));
    }

    #[test]
    fn empty_precondition_sentence() {
        let m = ActionModel::new("noop");
        let text = render_model_nl(&m, &reg()).unwrap();
        assert!(text.contains("This action has no preconditions."));
    }

    #[test]
    fn missing_description() {
        let mut m = ActionModel::new("x");
        m.effects.push(Literal::pos(Atom::new("mystery", Vec::<String>::new())));
        assert_eq!(
            render_model_nl(&m, &reg()),
            Err(NlError::MissingDescription("mystery".into()))
        );
    }

    #[test]
    fn ground_fact_substitution_respects_token_boundaries() {
        let def = PredicateDef::new(
            "on",
            vec![Param::new("?x", "block"), Param::new("?x2", "block")],
            "true if ?x is on ?x2",
        );
        assert_eq!(clause(&def, &["a".into(), "b".into()]), "a is on b");
    }
}
