//! Extraction of one action model from a structured language-model reply.
//!
//! The reply is expected to carry four sections, in this order:
//!
//! ```text
//! Parameters:
//! 1. ?x - block: the block to put down
//!
//! Preconditions:
//! ```(and (robot-holding ?x))```
//!
//! Effects:
//! ```(and (not (robot-holding ?x)) (block-clear ?x))```
//!
//! New Predicates:
//! 1. (block-clear ?x - block): true if the block ?x is not under any other block
//! ```
//!
//! Surrounding prose, markdown emphasis and code fences are tolerated.

use serde::{Deserialize, Serialize};

use super::ast::*;
use super::error::PddlError;
use super::parser::{conjunction, ParseMode};
use super::sexpr::{find_balanced, read_all, read_one};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BlockMode {
    /// Locate snippets inside chatty text.
    #[default]
    Tolerant,
    /// Section bodies must be exactly one PDDL expression (fences allowed).
    Strict,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionBlock {
    pub params: Vec<Param>,
    pub precondition: Vec<Literal>,
    pub constraints: Vec<ParamConstraint>,
    pub effects: Vec<Literal>,
    pub unsupported: Vec<UnsupportedConstruct>,
    pub new_predicates: Vec<PredicateDef>,
}

impl ActionBlock {
    pub fn into_model(self, name: &str, provenance: Provenance) -> (ActionModel, Vec<PredicateDef>) {
        let model = ActionModel {
            name: normalize_ident(name),
            params: self.params,
            precondition: self.precondition,
            constraints: self.constraints,
            effects: self.effects,
            unsupported: self.unsupported,
            provenance,
        };
        (model, self.new_predicates)
    }
}

const SECTIONS: [Section; 4] = [
    Section::Parameters,
    Section::Preconditions,
    Section::Effects,
    Section::NewPredicates,
];

pub fn parse_action_block(text: &str) -> Result<ActionBlock, PddlError> {
    parse_action_block_with(text, BlockMode::Tolerant)
}

pub fn parse_action_block_with(text: &str, mode: BlockMode) -> Result<ActionBlock, PddlError> {
    let bodies = split_sections(text)?;
    let mut block = ActionBlock {
        params: parameters(&bodies[0]).map_err(|e| wrap(Section::Parameters, e))?,
        ..Default::default()
    };

    let pre = formula(&bodies[1], mode, Section::Preconditions)?;
    block.precondition = pre.literals;
    block.constraints = pre.constraints;
    block.unsupported.extend(pre.unsupported);

    let eff = formula(&bodies[2], mode, Section::Effects)?;
    if let Some(c) = eff.constraints.first() {
        return Err(wrap(
            Section::Effects,
            PddlError::syntax(0, 0, c.to_string(), "equality is not allowed in effects"),
        ));
    }
    block.effects = eff.literals;
    block.unsupported.extend(eff.unsupported);

    block.new_predicates =
        parse_new_predicates(&bodies[3]).map_err(|e| wrap(Section::NewPredicates, e))?;
    Ok(block)
}

fn wrap(section: Section, e: PddlError) -> PddlError {
    PddlError::SnippetSyntax {
        section,
        source: Box::new(e),
    }
}

/// Recognizes a section header line and returns the section plus any
/// content following the colon on the same line.
fn header(line: &str) -> Option<(Section, &str)> {
    let trimmed = line
        .trim()
        .trim_start_matches(|c: char| c == '#' || c == '*' || c == '-' || c.is_whitespace());
    let colon = trimmed.find(':')?;
    let label: String = trimmed[..colon]
        .chars()
        .filter(|c| !matches!(c, '*' | '_' | '`'))
        .collect::<String>()
        .trim()
        .to_lowercase();
    let rest = trimmed[colon + 1..].trim_start_matches(['*', '_']).trim();
    let section = match label.as_str() {
        "parameters" | "parameter" | "arguments" => Section::Parameters,
        "preconditions" | "precondition" => Section::Preconditions,
        "effects" | "effect" => Section::Effects,
        "new predicates" | "new predicate" => Section::NewPredicates,
        _ => return None,
    };
    Some((section, rest))
}

fn split_sections(text: &str) -> Result<Vec<String>, PddlError> {
    let mut bodies: Vec<Option<String>> = vec![None; SECTIONS.len()];
    let mut current: Option<usize> = None;
    for line in text.lines() {
        if let Some((section, rest)) = header(line) {
            let idx = SECTIONS.iter().position(|s| *s == section).expect("known");
            if bodies[idx].is_none() {
                bodies[idx] = Some(String::new());
                current = Some(idx);
                if !rest.is_empty() {
                    let b = bodies[idx].as_mut().expect("just set");
                    b.push_str(rest);
                    b.push('\n');
                }
                continue;
            }
        }
        if let Some(i) = current {
            let b = bodies[i].as_mut().expect("current section");
            b.push_str(line);
            b.push('\n');
        }
    }
    SECTIONS
        .iter()
        .zip(bodies)
        .map(|(s, b)| b.ok_or_else(|| PddlError::MissingSection(s.label().to_string())))
        .collect()
}

fn strip_fences(body: &str) -> String {
    body.lines()
        .filter(|l| !l.trim_start().starts_with("```"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn is_none_marker(body: &str) -> bool {
    let t = body
        .trim()
        .trim_matches(|c: char| c == '.' || c == '*' || c == '`' || c.is_whitespace())
        .to_lowercase();
    t.is_empty() || t == "none" || t == "no new predicates" || t == "n/a"
}

fn formula(
    body: &str,
    mode: BlockMode,
    section: Section,
) -> Result<super::parser::Conjunction, PddlError> {
    let body = strip_fences(body);
    let snippet = match mode {
        BlockMode::Strict => {
            if is_none_marker(&body) {
                return Ok(Default::default());
            }
            body.trim().to_string()
        }
        BlockMode::Tolerant => match find_balanced(&body) {
            Some((s, e)) => body[s..e].to_string(),
            None if is_none_marker(&body) || !body.contains('(') => {
                return Ok(Default::default())
            }
            None => {
                return Err(wrap(
                    section,
                    PddlError::syntax(0, 0, body.trim(), "unbalanced parentheses"),
                ))
            }
        },
    };
    let expr = read_one(&snippet).map_err(|e| wrap(section, e))?;
    conjunction(&expr, section, ParseMode::Lenient).map_err(|e| wrap(section, e))
}

fn strip_list_marker(line: &str) -> &str {
    let t = line.trim();
    let t = t.trim_start_matches(['-', '*', '•']).trim_start();
    let digits = t.chars().take_while(|c| c.is_ascii_digit()).count();
    if digits > 0 {
        let rest = &t[digits..];
        if let Some(r) = rest.strip_prefix('.').or_else(|| rest.strip_prefix(')')) {
            return r.trim_start();
        }
    }
    t
}

fn parameters(body: &str) -> Result<Vec<Param>, PddlError> {
    let mut out: Vec<Param> = Vec::new();
    for raw in strip_fences(body).lines() {
        let line = strip_list_marker(raw).trim_matches('`');
        let Some(q) = line.find('?') else { continue };
        let rest = &line[q..];
        let var_end = rest
            .find(|c: char| c.is_whitespace() || c == ':' || c == ',' || c == '`')
            .unwrap_or(rest.len());
        let var = normalize_ident(&rest[..var_end]);
        if !is_identifier(var.trim_start_matches('?')) {
            return Err(PddlError::syntax(0, 0, var, "invalid parameter variable"));
        }
        let after = rest[var_end..].trim_start_matches('`').trim_start();
        let (ty, tail) = match after.strip_prefix('-') {
            Some(t) => {
                let t = t.trim_start();
                let end = t
                    .find(|c: char| c.is_whitespace() || c == ':' || c == ',' || c == '`' || c == ')')
                    .unwrap_or(t.len());
                (t[..end].to_string(), &t[end..])
            }
            None => (ROOT_TYPE.to_string(), after),
        };
        if !is_identifier(&ty) {
            return Err(PddlError::syntax(0, 0, ty, "invalid parameter type"));
        }
        let desc = tail
            .trim_start_matches(['`', ')'])
            .trim_start()
            .strip_prefix(':')
            .map(|d| d.trim().to_string())
            .filter(|d| !d.is_empty());
        if out.iter().any(|p| p.name == var) {
            continue;
        }
        out.push(Param {
            name: var,
            ty,
            description: desc,
        });
    }
    Ok(out)
}

/// Parses `N. (name ?x - type): description` lines; `None` yields nothing.
pub fn parse_new_predicates(body: &str) -> Result<Vec<PredicateDef>, PddlError> {
    let body = strip_fences(body);
    if is_none_marker(&body) {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for raw in body.lines() {
        let line = strip_list_marker(raw).trim_matches('`').trim();
        if !line.starts_with('(') {
            continue;
        }
        let (s, e) = find_balanced(line)
            .ok_or_else(|| PddlError::syntax(0, 0, line, "unbalanced predicate signature"))?;
        let exprs = read_all(&line[s..e])?;
        let sig = &exprs[0];
        let items = sig
            .list()
            .filter(|i| !i.is_empty())
            .ok_or_else(|| sig.error("expected a predicate signature"))?;
        let name = items[0]
            .symbol()
            .filter(|s| is_identifier(s))
            .ok_or_else(|| items[0].error("expected a predicate name"))?;
        let mut params = Vec::new();
        let mut i = 1;
        let mut pending: Vec<String> = Vec::new();
        while i < items.len() {
            let tok = items[i]
                .symbol()
                .ok_or_else(|| items[i].error("unexpected list in signature"))?;
            if tok == "-" {
                let ty = items
                    .get(i + 1)
                    .and_then(|t| t.symbol())
                    .ok_or_else(|| items[i].error("expected a type after '-'"))?;
                for v in pending.drain(..) {
                    params.push(Param::new(v, ty));
                }
                i += 2;
            } else {
                if !tok.starts_with('?') {
                    return Err(items[i].error("expected a variable like ?x"));
                }
                pending.push(normalize_ident(tok));
                i += 1;
            }
        }
        for v in pending {
            params.push(Param::new(v, ROOT_TYPE));
        }
        let tail = line[e..].trim_start();
        let description = tail
            .strip_prefix(':')
            .or_else(|| tail.strip_prefix('-'))
            .unwrap_or(tail)
            .trim()
            .to_string();
        if description.is_empty() {
            return Err(PddlError::syntax(
                0,
                0,
                line,
                "every new predicate needs a natural-language description after ':'",
            ));
        }
        out.push(PredicateDef {
            name: normalize_ident(name),
            params,
            description,
        });
    }
    Ok(out)
}

/// Renders an action model in the reply format that
/// [`parse_action_block`] reads. Used to author scripted replies.
pub fn format_action_block(model: &ActionModel, new_predicates: &[PredicateDef]) -> String {
    let mut out = String::from("Parameters:\n");
    if model.params.is_empty() {
        out.push_str("None\n");
    }
    for (i, p) in model.params.iter().enumerate() {
        out.push_str(&format!("{}. {} - {}", i + 1, p.name, p.ty));
        if let Some(d) = &p.description {
            out.push_str(&format!(": {d}"));
        }
        out.push('\n');
    }
    let block = |items: Vec<String>| -> String {
        let mut s = String::from("```\n(and\n");
        for it in items {
            s.push_str(&format!("    {it}\n"));
        }
        s.push_str(")\n```\n");
        s
    };
    let mut pre: Vec<String> = model.precondition.iter().map(|l| l.to_string()).collect();
    pre.extend(model.constraints.iter().map(|c| c.to_string()));
    pre.extend(
        model
            .unsupported
            .iter()
            .filter(|u| u.section == Section::Preconditions)
            .map(|u| u.snippet.clone()),
    );
    out.push_str("\nPreconditions:\n");
    out.push_str(&block(pre));
    let mut eff: Vec<String> = model.effects.iter().map(|l| l.to_string()).collect();
    eff.extend(
        model
            .unsupported
            .iter()
            .filter(|u| u.section == Section::Effects)
            .map(|u| u.snippet.clone()),
    );
    out.push_str("\nEffects:\n");
    out.push_str(&block(eff));
    out.push_str("\nNew Predicates:\n");
    if new_predicates.is_empty() {
        out.push_str("None\n");
    }
    for (i, p) in new_predicates.iter().enumerate() {
        out.push_str(&format!("{}. {}: {}\n", i + 1, p.signature(), p.description));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const REPLY: &str = "Sure, here is the model.\n\n\
**Parameters:**\n\
1. ?x - block: the block to put down\n\n\
Preconditions:\n\
```\n(and\n    (robot-holding ?x)\n)\n```\n\n\
Effects:\n\
```\n(and\n    (not (robot-holding ?x))\n    (block-clear ?x)\n    (robot-hand-empty)\n)\n```\n\n\
New Predicates:\n\
1. (block-clear ?x - block): true if the block ?x is not under any other block\n";

    #[test]
    fn extracts_every_section() {
        let b = parse_action_block(REPLY).unwrap();
        assert_eq!(b.params, vec![Param::new("?x", "block").described("the block to put down")]);
        assert_eq!(b.precondition.len(), 1);
        assert_eq!(b.effects.len(), 3);
        assert_eq!(b.new_predicates.len(), 1);
        assert_eq!(
            b.new_predicates[0].description,
            "true if the block ?x is not under any other block"
        );
    }

    #[test]
    fn none_under_new_predicates() {
        let text = REPLY.split("New Predicates:").next().unwrap().to_string() + "New Predicates:\nNone\n";
        assert!(parse_action_block(&text).unwrap().new_predicates.is_empty());
    }

    #[test]
    fn missing_effects_section() {
        let start = REPLY.find("Effects:").unwrap();
        let end = REPLY.find("New Predicates:").unwrap();
        let text = format!("{}{}", &REPLY[..start], &REPLY[end..]);
        assert_eq!(
            parse_action_block(&text).unwrap_err(),
            PddlError::MissingSection("Effects".into())
        );
    }

    #[test]
    fn broken_snippet_is_wrapped_with_section() {
        let text = REPLY.replace("(robot-holding ?x)\n)", "(robot-holding ?x\n)");
        match parse_action_block(&text).unwrap_err() {
            PddlError::SnippetSyntax { section, .. } => assert_eq!(section, Section::Preconditions),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn strict_mode_rejects_prose_around_snippet() {
        let text = REPLY.replace("```\n(and\n    (robot-holding ?x)\n)\n```", "It needs (robot-holding ?x) first.");
        assert!(parse_action_block(&text).is_ok());
        assert!(parse_action_block_with(&text, BlockMode::Strict).is_err());
    }

    #[test]
    fn format_then_parse_is_identity() {
        let b = parse_action_block(REPLY).unwrap();
        let (model, preds) = b.clone().into_model("put-down", Provenance::Handwritten);
        let again = parse_action_block(&format_action_block(&model, &preds)).unwrap();
        assert_eq!(again, b);
    }
}
