//! Canonical printer. Two-space indentation, declaration order preserved,
//! descriptions and provenance emitted as trailing `;` comments so the
//! output parses back to an equal model.

use std::fmt::Write as _;

use super::ast::*;

pub fn print_domain(d: &DomainModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (domain {})", d.name);
    let _ = writeln!(out, "  (:requirements {})", requirements(d).join(" "));
    if !d.types.is_empty() {
        out.push_str("  (:types\n");
        let pairs: Vec<(&str, &str)> = d
            .types
            .decls()
            .iter()
            .map(|t| (t.name.as_str(), t.parent.as_str()))
            .collect();
        for (names, parent) in runs(&pairs) {
            let _ = writeln!(out, "    {} - {}", names.join(" "), parent);
        }
        out.push_str("  )\n");
    }
    if !d.predicates.is_empty() {
        out.push_str("  (:predicates\n");
        for p in &d.predicates {
            let _ = write!(out, "    {}", p.signature());
            push_comment(&mut out, &p.description);
            out.push('\n');
        }
        out.push_str("  )\n");
    }
    for a in &d.actions {
        out.push_str(&print_action(a, 1));
    }
    out.push_str(")\n");
    out
}

/// Prints one `(:action ...)` block indented by `level` two-space steps.
pub fn print_action(a: &ActionModel, level: usize) -> String {
    let ind = "  ".repeat(level);
    let mut out = String::new();
    let _ = write!(out, "{ind}(:action {}", a.name);
    if let Provenance::Message { .. } = a.provenance {
        let _ = write!(out, " ; source: {}", a.provenance);
    }
    out.push('\n');

    if a.params.iter().any(|p| p.description.is_some()) {
        let _ = writeln!(out, "{ind}  :parameters (");
        for p in &a.params {
            let _ = write!(out, "{ind}    {} - {}", p.name, p.ty);
            if let Some(d) = &p.description {
                push_comment(&mut out, d);
            }
            out.push('\n');
        }
        let _ = writeln!(out, "{ind}  )");
    } else {
        let params: Vec<String> = a
            .params
            .iter()
            .map(|p| format!("{} - {}", p.name, p.ty))
            .collect();
        let _ = writeln!(out, "{ind}  :parameters ({})", params.join(" "));
    }

    let mut pre: Vec<String> = a.precondition.iter().map(|l| l.to_string()).collect();
    pre.extend(a.constraints.iter().map(|c| c.to_string()));
    pre.extend(
        a.unsupported
            .iter()
            .filter(|u| u.section == Section::Preconditions)
            .map(|u| u.snippet.clone()),
    );
    conjunction(&mut out, &ind, ":precondition", &pre);

    let mut eff: Vec<String> = a.effects.iter().map(|l| l.to_string()).collect();
    eff.extend(
        a.unsupported
            .iter()
            .filter(|u| u.section == Section::Effects)
            .map(|u| u.snippet.clone()),
    );
    conjunction(&mut out, &ind, ":effect", &eff);
    let _ = writeln!(out, "{ind})");
    out
}

fn conjunction(out: &mut String, ind: &str, key: &str, items: &[String]) {
    if items.is_empty() {
        let _ = writeln!(out, "{ind}  {key} (and)");
        return;
    }
    let _ = writeln!(out, "{ind}  {key} (and");
    for it in items {
        let _ = writeln!(out, "{ind}    {it}");
    }
    let _ = writeln!(out, "{ind}  )");
}

fn push_comment(out: &mut String, text: &str) {
    let text = text.split_whitespace().collect::<Vec<_>>().join(" ");
    if !text.is_empty() {
        let _ = write!(out, " ; {text}");
    }
}

/// Requirement flags implied by the model's contents.
pub fn requirements(d: &DomainModel) -> Vec<&'static str> {
    let mut reqs = vec![":strips", ":typing"];
    if d
        .actions
        .iter()
        .any(|a| a.precondition.iter().any(|l| !l.positive))
    {
        reqs.push(":negative-preconditions");
    }
    if d.actions.iter().any(|a| !a.constraints.is_empty()) {
        reqs.push(":equality");
    }
    reqs
}

/// Groups consecutive names sharing a type: `[(a,t),(b,t),(c,u)]` ->
/// `[([a,b],t),([c],u)]`.
fn runs<'a>(pairs: &[(&'a str, &'a str)]) -> Vec<(Vec<&'a str>, &'a str)> {
    let mut out: Vec<(Vec<&str>, &str)> = Vec::new();
    for &(name, ty) in pairs {
        match out.last_mut() {
            Some((names, t)) if *t == ty => names.push(name),
            _ => out.push((vec![name], ty)),
        }
    }
    out
}

pub fn print_problem(p: &ProblemSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (problem {})", p.name);
    let _ = writeln!(out, "  (:domain {})", p.domain);
    if !p.objects.is_empty() {
        out.push_str("  (:objects\n");
        let pairs: Vec<(&str, &str)> = p
            .objects
            .iter()
            .map(|o| (o.name.as_str(), o.ty.as_str()))
            .collect();
        for (names, ty) in runs(&pairs) {
            let _ = writeln!(out, "    {} - {}", names.join(" "), ty);
        }
        out.push_str("  )\n");
    }
    if p.init.is_empty() {
        out.push_str("  (:init)\n");
    } else {
        out.push_str("  (:init\n");
        for a in &p.init {
            let _ = writeln!(out, "    {a}");
        }
        out.push_str("  )\n");
    }
    if p.goal.is_empty() {
        out.push_str("  (:goal (and))\n");
    } else {
        out.push_str("  (:goal (and\n");
        for l in &p.goal {
            let _ = writeln!(out, "    {l}");
        }
        out.push_str("  ))\n");
    }
    out.push_str(")\n");
    out
}

/// One `(action obj ...)` per line.
pub fn print_plan(plan: &Plan) -> String {
    let mut out = String::new();
    for s in &plan.steps {
        let _ = writeln!(out, "{s}");
    }
    out
}

/// `(and (a) (not (b)))` on one line.
pub fn print_conjunction(lits: &[Literal]) -> String {
    let parts: Vec<String> = lits.iter().map(|l| l.to_string()).collect();
    if parts.is_empty() {
        "(and)".to_string()
    } else {
        format!("(and {})", parts.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::parse_domain;

    #[test]
    fn empty_domain_is_minimal_and_reparses() {
        let d = DomainModel::new("empty");
        let text = print_domain(&d);
        assert_eq!(text, "(define (domain empty)\n  (:requirements :strips :typing)\n)\n");
        assert_eq!(parse_domain(&text).unwrap(), d);
    }

    #[test]
    fn description_is_a_trailing_comment() {
        let mut d = DomainModel::new("b");
        d.types = TypeHierarchy::from_pairs([("block", "object")]).unwrap();
        d.predicates.push(PredicateDef::new(
            "block-clear",
            vec![Param::new("?x", "block")],
            "true if the block ?x is not under any other block",
        ));
        let text = print_domain(&d);
        assert!(text.contains(
            "    (block-clear ?x - block) ; true if the block ?x is not under any other block\n"
        ));
    }

    #[test]
    fn provenance_and_param_roles_round_trip() {
        let mut d = DomainModel::new("b");
        d.types = TypeHierarchy::from_pairs([("block", "object")]).unwrap();
        d.predicates.push(PredicateDef::new("held", vec![Param::new("?x", "block")], "held"));
        let mut a = ActionModel::new("drop");
        a.params.push(Param::new("?x", "block").described("the block to drop"));
        a.precondition.push(Literal::pos(Atom::new("held", ["?x"])));
        a.effects.push(Literal::neg(Atom::new("held", ["?x"])));
        a.provenance = Provenance::Message {
            conversation: "drop-pass2".into(),
            index: 3,
        };
        d.actions.push(a);
        let text = print_domain(&d);
        let back = parse_domain(&text).unwrap();
        assert_eq!(back, d);
        assert_eq!(print_domain(&back), text);
    }
}
