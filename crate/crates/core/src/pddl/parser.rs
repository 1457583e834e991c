use super::ast::*;
use super::error::PddlError;
use super::sexpr::{read_all, read_one, Node, SExpr};

/// Requirement flags accepted in `(:requirements ...)`.
pub const SUPPORTED_REQUIREMENTS: &[&str] =
    &[":strips", ":typing", ":negative-preconditions", ":equality"];

/// Heads that fall outside the STRIPS + typing + negation + equality subset.
pub const UNSUPPORTED_HEADS: &[&str] = &[
    "forall", "exists", "when", "imply", "oneof", "or", "increase", "decrease", "assign",
    "scale-up", "scale-down",
];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ParseMode {
    /// Reject anything outside the supported subset and type-check every
    /// literal.
    #[default]
    Strict,
    /// Keep unsupported formulas as [`UnsupportedConstruct`]s and skip
    /// semantic checks, so the auditor can report them as feedback.
    Lenient,
}

/// Parses and type-checks a domain.
pub fn parse_domain(text: &str) -> Result<DomainModel, PddlError> {
    parse_domain_with(text, ParseMode::Strict)
}

pub fn parse_domain_with(text: &str, mode: ParseMode) -> Result<DomainModel, PddlError> {
    let root = read_one(text)?;
    let items = expect_define(&root, "domain")?;
    let name = header_name(&root, items, "domain")?;

    let mut domain = DomainModel::new(name);
    for section in &items[2..] {
        let head = section
            .head()
            .ok_or_else(|| section.error("expected a domain section"))?;
        let body = &section.list().expect("list")[1..];
        match head.as_str() {
            ":requirements" => {
                for req in body {
                    let r = req
                        .symbol()
                        .ok_or_else(|| req.error("expected a requirement flag"))?
                        .to_lowercase();
                    if !SUPPORTED_REQUIREMENTS.contains(&r.as_str()) {
                        return Err(PddlError::UnsupportedFeature { keyword: r });
                    }
                }
            }
            ":types" => {
                let pairs = typed_list(body, false)?;
                domain.types = TypeHierarchy::from_pairs(
                    pairs.into_iter().map(|(n, t, _)| (n, t)),
                )?;
            }
            ":predicates" => {
                for p in body {
                    domain.predicates.push(predicate_def(p)?);
                }
            }
            ":action" => domain.actions.push(action(section, mode)?),
            other => {
                return Err(PddlError::UnsupportedFeature {
                    keyword: other.to_string(),
                })
            }
        }
    }
    canonicalize_types(&mut domain)?;
    if mode == ParseMode::Strict {
        check_domain(&domain)?;
    }
    Ok(domain)
}

/// Replaces type references with their declared spelling. Unknown types are
/// left untouched for [`check_domain`] or the auditor to report.
fn canonicalize_types(domain: &mut DomainModel) -> Result<(), PddlError> {
    let types = domain.types.clone();
    let fix = |p: &mut Param| {
        if let Some(t) = types.resolve(&p.ty) {
            p.ty = t.to_string();
        }
    };
    for pred in &mut domain.predicates {
        pred.params.iter_mut().for_each(fix);
    }
    for a in &mut domain.actions {
        a.params.iter_mut().for_each(fix);
    }
    Ok(())
}

fn expect_define<'a>(root: &'a SExpr, kind: &str) -> Result<&'a [SExpr], PddlError> {
    let items = root
        .list()
        .ok_or_else(|| root.error("expected '(define ...)'"))?;
    if root.head().as_deref() != Some("define") {
        return Err(root.error("expected '(define ...)'"));
    }
    if items.len() < 2 {
        return Err(root.error(format!("expected '({kind} <name>)' after define")));
    }
    Ok(items)
}

fn header_name(root: &SExpr, items: &[SExpr], kind: &str) -> Result<String, PddlError> {
    let header = &items[1];
    match header.list() {
        Some([k, n]) if k.symbol().map(|s| s.eq_ignore_ascii_case(kind)) == Some(true) => {
            ident(n)
        }
        _ => Err(root.error(format!("expected '({kind} <name>)'"))),
    }
}

fn ident(e: &SExpr) -> Result<String, PddlError> {
    let s = e
        .symbol()
        .ok_or_else(|| e.error("expected a name"))?;
    if !is_identifier(s) {
        return Err(e.error("invalid identifier"));
    }
    Ok(normalize_ident(s))
}

fn variable(e: &SExpr) -> Result<String, PddlError> {
    let s = e.symbol().ok_or_else(|| e.error("expected a variable"))?;
    match s.strip_prefix('?') {
        Some(rest) if is_identifier(rest) => Ok(normalize_ident(s)),
        _ => Err(e.error("expected a variable like ?x")),
    }
}

fn term(e: &SExpr) -> Result<String, PddlError> {
    match e.symbol() {
        Some(s) if s.starts_with('?') => variable(e),
        Some(_) => ident(e),
        None => Err(e.error("expected a variable or object name")),
    }
}

/// `a b - t c - u d` -> [(a,t),(b,t),(c,u),(d,object)]; the third element
/// is the comment attached to the type token (or to the name when untyped).
fn typed_list(
    items: &[SExpr],
    vars: bool,
) -> Result<Vec<(String, String, Option<String>)>, PddlError> {
    let mut out = Vec::new();
    let mut pending: Vec<(String, Option<String>)> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let it = &items[i];
        if it.symbol() == Some("-") {
            let ty = items
                .get(i + 1)
                .ok_or_else(|| it.error("expected a type after '-'"))?;
            let ty_name = ty
                .symbol()
                .ok_or_else(|| ty.error("expected a type name"))?;
            if !is_identifier(ty_name) {
                return Err(ty.error("invalid type name"));
            }
            if pending.is_empty() {
                return Err(it.error("'-' without preceding names"));
            }
            let n = pending.len();
            for (k, (name, c)) in pending.drain(..).enumerate() {
                let comment = if k + 1 == n {
                    ty.comment.clone().or(c)
                } else {
                    c
                };
                out.push((name, ty_name.to_string(), comment));
            }
            i += 2;
            continue;
        }
        let name = if vars { variable(it)? } else { type_or_ident(it)? };
        pending.push((name, it.comment.clone()));
        i += 1;
    }
    for (name, c) in pending {
        out.push((name, ROOT_TYPE.to_string(), c));
    }
    Ok(out)
}

/// Type names keep their declared spelling; everything else is lowercased.
fn type_or_ident(e: &SExpr) -> Result<String, PddlError> {
    let s = e.symbol().ok_or_else(|| e.error("expected a name"))?;
    if !is_identifier(s) {
        return Err(e.error("invalid identifier"));
    }
    Ok(s.to_string())
}

fn predicate_def(e: &SExpr) -> Result<PredicateDef, PddlError> {
    let items = e
        .list()
        .filter(|i| !i.is_empty())
        .ok_or_else(|| e.error("expected a predicate declaration"))?;
    let name = ident(&items[0])?;
    let params = typed_list(&items[1..], true)?
        .into_iter()
        .map(|(n, t, _)| Param::new(n, t))
        .collect();
    Ok(PredicateDef {
        name,
        params,
        description: e.comment.clone().unwrap_or_default(),
    })
}

fn action(e: &SExpr, mode: ParseMode) -> Result<ActionModel, PddlError> {
    let items = e.list().expect("list");
    let name_node = items
        .get(1)
        .ok_or_else(|| e.error("expected an action name"))?;
    let mut model = ActionModel::new(ident(name_node)?);
    if let Some(c) = &name_node.comment {
        if let Some(src) = c.strip_prefix("source:") {
            model.provenance = Provenance::parse(src);
        }
    }
    let mut i = 2;
    while i < items.len() {
        let key = items[i]
            .symbol()
            .ok_or_else(|| items[i].error("expected an action keyword"))?
            .to_lowercase();
        let value = items
            .get(i + 1)
            .ok_or_else(|| items[i].error("missing value"))?;
        match key.as_str() {
            ":parameters" => {
                let list = value
                    .list()
                    .ok_or_else(|| value.error("expected a parameter list"))?;
                model.params = typed_list(list, true)?
                    .into_iter()
                    .map(|(n, t, c)| Param {
                        name: n,
                        ty: t,
                        description: c,
                    })
                    .collect();
            }
            ":precondition" => {
                let mut acc = Conjunction::default();
                condition(value, Section::Preconditions, mode, &mut acc)?;
                model.precondition = acc.literals;
                model.constraints = acc.constraints;
                model.unsupported.extend(acc.unsupported);
            }
            ":effect" => {
                let mut acc = Conjunction::default();
                condition(value, Section::Effects, mode, &mut acc)?;
                if let Some(c) = acc.constraints.first() {
                    return Err(value.error(format!("equality {c} is not allowed in effects")));
                }
                model.effects = acc.literals;
                model.unsupported.extend(acc.unsupported);
            }
            other => {
                return Err(PddlError::UnsupportedFeature {
                    keyword: other.to_string(),
                })
            }
        }
        i += 2;
    }
    Ok(model)
}

/// Flattened contents of a conjunctive formula.
#[derive(Default, Debug)]
pub(crate) struct Conjunction {
    pub literals: Vec<Literal>,
    pub constraints: Vec<ParamConstraint>,
    pub unsupported: Vec<UnsupportedConstruct>,
}

pub(crate) fn condition(
    e: &SExpr,
    section: Section,
    mode: ParseMode,
    acc: &mut Conjunction,
) -> Result<(), PddlError> {
    let items = e
        .list()
        .ok_or_else(|| e.error("expected a formula"))?;
    if items.is_empty() {
        return Ok(());
    }
    let head = e.head().ok_or_else(|| items[0].error("expected a predicate name"))?;
    match head.as_str() {
        "and" => {
            for sub in &items[1..] {
                condition(sub, section, mode, acc)?;
            }
            Ok(())
        }
        "not" => {
            let inner = match &items[1..] {
                [inner] => inner,
                _ => return Err(e.error("'not' takes exactly one argument")),
            };
            match inner.head().as_deref() {
                Some("=") => {
                    acc.constraints.push(equality(inner, false)?);
                    Ok(())
                }
                Some(h) if UNSUPPORTED_HEADS.contains(&h) || h == "and" || h == "not" => {
                    unsupported(e, h, section, mode, acc)
                }
                Some(_) => {
                    acc.literals.push(Literal::neg(atom(inner)?));
                    Ok(())
                }
                None => Err(inner.error("expected an atom inside 'not'")),
            }
        }
        "=" => {
            acc.constraints.push(equality(e, true)?);
            Ok(())
        }
        h if UNSUPPORTED_HEADS.contains(&h) => unsupported(e, h, section, mode, acc),
        _ => {
            acc.literals.push(Literal::pos(atom(e)?));
            Ok(())
        }
    }
}

fn unsupported(
    e: &SExpr,
    keyword: &str,
    section: Section,
    mode: ParseMode,
    acc: &mut Conjunction,
) -> Result<(), PddlError> {
    match mode {
        ParseMode::Strict => Err(PddlError::UnsupportedFeature {
            keyword: keyword.to_string(),
        }),
        ParseMode::Lenient => {
            acc.unsupported.push(UnsupportedConstruct {
                keyword: keyword.to_string(),
                section,
                snippet: e.to_string(),
            });
            Ok(())
        }
    }
}

fn equality(e: &SExpr, equal: bool) -> Result<ParamConstraint, PddlError> {
    match e.list() {
        Some([_, l, r]) => Ok(ParamConstraint {
            left: term(l)?,
            right: term(r)?,
            equal,
        }),
        _ => Err(e.error("'=' takes exactly two arguments")),
    }
}

fn atom(e: &SExpr) -> Result<Atom, PddlError> {
    let items = e.list().ok_or_else(|| e.error("expected an atom"))?;
    let pred = items
        .first()
        .ok_or_else(|| e.error("empty atom"))?;
    if matches!(pred.node, Node::List(_)) {
        return Err(pred.error("expected a predicate name"));
    }
    let mut args = Vec::with_capacity(items.len() - 1);
    for a in &items[1..] {
        args.push(term(a)?);
    }
    Ok(Atom {
        predicate: ident(pred)?,
        args,
    })
}

/// Parses a bare conjunction such as `(and (a ?x) (not (b ?x)))`.
pub(crate) fn conjunction(
    e: &SExpr,
    section: Section,
    mode: ParseMode,
) -> Result<Conjunction, PddlError> {
    let mut acc = Conjunction::default();
    condition(e, section, mode, &mut acc)?;
    Ok(acc)
}

/// Semantic checks for a domain parsed in lenient mode.
pub fn check_domain(d: &DomainModel) -> Result<(), PddlError> {
    let h = &d.types;
    for (i, p) in d.predicates.iter().enumerate() {
        if d.predicates[..i].iter().any(|q| q.name == p.name) {
            return Err(PddlError::DuplicateName {
                kind: "predicate",
                name: p.name.clone(),
            });
        }
        if h.contains(&p.name) {
            return Err(PddlError::PredicateTypeClash(p.name.clone()));
        }
        check_params(&p.params, h)?;
    }
    for (i, a) in d.actions.iter().enumerate() {
        if d.actions[..i].iter().any(|b| b.name == a.name) {
            return Err(PddlError::DuplicateName {
                kind: "action",
                name: a.name.clone(),
            });
        }
        check_action(a, &d.predicates, h)?;
    }
    Ok(())
}

fn check_params(params: &[Param], h: &TypeHierarchy) -> Result<(), PddlError> {
    for (i, p) in params.iter().enumerate() {
        if params[..i].iter().any(|q| q.name == p.name) {
            return Err(PddlError::DuplicateName {
                kind: "parameter",
                name: p.name.clone(),
            });
        }
        if !h.contains(&p.ty) {
            return Err(PddlError::UnknownType(p.ty.clone()));
        }
    }
    Ok(())
}

/// Arity, binding and type checks for one action against a predicate table.
pub fn check_action(
    a: &ActionModel,
    predicates: &[PredicateDef],
    h: &TypeHierarchy,
) -> Result<(), PddlError> {
    if let Some(u) = a.unsupported.first() {
        return Err(PddlError::UnsupportedFeature {
            keyword: u.keyword.clone(),
        });
    }
    check_params(&a.params, h)?;
    for c in &a.constraints {
        for v in [&c.left, &c.right] {
            if is_variable(v) && a.param(v).is_none() {
                return Err(PddlError::UnboundVariable {
                    action: a.name.clone(),
                    variable: v.clone(),
                });
            }
        }
    }
    for (_, lit) in a.literals() {
        let def = predicates
            .iter()
            .find(|p| p.name == lit.atom.predicate)
            .ok_or_else(|| PddlError::UnknownPredicate(lit.atom.predicate.clone()))?;
        if def.arity() != lit.atom.args.len() {
            return Err(PddlError::ArityMismatch {
                predicate: def.name.clone(),
                expected: def.arity(),
                found: lit.atom.args.len(),
            });
        }
        for (pos, (arg, formal)) in lit.atom.args.iter().zip(&def.params).enumerate() {
            let param = a.param(arg).ok_or_else(|| PddlError::UnboundVariable {
                action: a.name.clone(),
                variable: arg.clone(),
            })?;
            if !h.is_subtype(&param.ty, &formal.ty)? {
                return Err(PddlError::TypeMismatch {
                    predicate: def.name.clone(),
                    position: pos + 1,
                    expected: formal.ty.clone(),
                    found: param.ty.clone(),
                });
            }
        }
    }
    Ok(())
}

/// Parses a problem against an already parsed domain.
pub fn parse_problem(text: &str, domain: &DomainModel) -> Result<ProblemSpec, PddlError> {
    let root = read_one(text)?;
    let items = expect_define(&root, "problem")?;
    let name = header_name(&root, items, "problem")?;
    let mut problem = ProblemSpec::new(name, domain.name.clone());

    for section in &items[2..] {
        let head = section
            .head()
            .ok_or_else(|| section.error("expected a problem section"))?;
        let body = &section.list().expect("list")[1..];
        match head.as_str() {
            ":domain" => {
                let d = body
                    .first()
                    .ok_or_else(|| section.error("expected a domain name"))?;
                problem.domain = ident(d)?;
            }
            ":objects" => {
                for (n, t, _) in typed_list(body, false)? {
                    let ty = domain
                        .types
                        .resolve(&t)
                        .ok_or_else(|| PddlError::UnknownType(t.clone()))?
                        .to_string();
                    let n = normalize_ident(&n);
                    if problem.object_type(&n).is_some() {
                        return Err(PddlError::DuplicateName {
                            kind: "object",
                            name: n,
                        });
                    }
                    problem.objects.push(ObjectDecl { name: n, ty });
                }
            }
            ":init" => {
                for f in body {
                    let a = atom(f)?;
                    if problem.init.contains(&a) {
                        continue;
                    }
                    problem.init.push(a);
                }
            }
            ":goal" => {
                let g = match body {
                    [g] => g,
                    [] => continue,
                    _ => return Err(section.error("expected a single goal formula")),
                };
                let acc = conjunction(g, Section::Goal, ParseMode::Strict)?;
                if let Some(c) = acc.constraints.first() {
                    return Err(g.error(format!("equality {c} is not allowed in goals")));
                }
                problem.goal = acc.literals;
            }
            other => {
                return Err(PddlError::UnsupportedFeature {
                    keyword: other.to_string(),
                })
            }
        }
    }
    for a in &problem.init {
        check_ground_atom(a, domain, &problem)?;
    }
    for l in &problem.goal {
        check_ground_atom(&l.atom, domain, &problem)?;
    }
    Ok(problem)
}

/// Checks a ground atom for predicate existence, arity, declared objects
/// and argument types.
pub fn check_ground_atom(
    a: &Atom,
    domain: &DomainModel,
    problem: &ProblemSpec,
) -> Result<(), PddlError> {
    let def = domain
        .predicate(&a.predicate)
        .ok_or_else(|| PddlError::UnknownPredicate(a.predicate.clone()))?;
    if def.arity() != a.args.len() {
        return Err(PddlError::ArityMismatch {
            predicate: def.name.clone(),
            expected: def.arity(),
            found: a.args.len(),
        });
    }
    for (pos, (arg, formal)) in a.args.iter().zip(&def.params).enumerate() {
        if is_variable(arg) {
            return Err(PddlError::UnboundVariable {
                action: String::new(),
                variable: arg.clone(),
            });
        }
        let ty = problem
            .object_type(arg)
            .ok_or_else(|| PddlError::UnknownObject(arg.clone()))?;
        if !domain.types.is_subtype(ty, &formal.ty)? {
            return Err(PddlError::TypeMismatch {
                predicate: def.name.clone(),
                position: pos + 1,
                expected: formal.ty.clone(),
                found: ty.to_string(),
            });
        }
    }
    Ok(())
}

/// Parses a standalone goal formula: one conjunction of literals.
pub fn parse_goal(text: &str) -> Result<Vec<Literal>, PddlError> {
    let g = read_one(text)?;
    let acc = conjunction(&g, Section::Goal, ParseMode::Strict)?;
    if let Some(c) = acc.constraints.first() {
        return Err(g.error(format!("equality {c} is not allowed in goals")));
    }
    Ok(acc.literals)
}

/// Parses plan text: one `(action obj ...)` per line, `;` comments ignored.
pub fn parse_plan(text: &str) -> Result<Plan, PddlError> {
    let mut steps = Vec::new();
    for e in read_all(text)? {
        let items = e.list().ok_or_else(|| e.error("expected '(action args...)'"))?;
        let (head, args) = items
            .split_first()
            .ok_or_else(|| e.error("empty plan step"))?;
        let action = ident(head)?;
        let args = args.iter().map(ident).collect::<Result<Vec<_>, _>>()?;
        steps.push(PlanStep { action, args });
    }
    Ok(Plan { steps })
}

#[cfg(test)]
mod tests {
    use super::*;

    const PUT_DOWN: &str = r#"
(define (domain blocks)
  (:requirements :strips :typing)
  (:types block)
  (:predicates
    (robot-holding ?x - block) ; true if the robot is holding the block ?x
    (block-clear ?x - block))
  (:action put-down
    :parameters (?x - block)
    :precondition (and (robot-holding ?x))
    :effect (and (not (robot-holding ?x)) (block-clear ?x))))
"#;

    #[test]
    fn put_down_precondition_is_one_positive_literal() {
        let d = parse_domain(PUT_DOWN).unwrap();
        let a = d.action("put-down").unwrap();
        assert_eq!(a.precondition, vec![Literal::pos(Atom::new("robot-holding", ["?x"]))]);
        assert_eq!(d.predicates[0].description, "true if the robot is holding the block ?x");
        assert_eq!(a.add_list().count(), 1);
        assert_eq!(a.del_list().count(), 1);
    }

    #[test]
    fn zero_actions_one_type() {
        let d = parse_domain("(define (domain empty) (:types thing))").unwrap();
        assert!(d.actions.is_empty());
        assert_eq!(d.types.decls().len(), 1);
    }

    #[test]
    fn case_is_normalized_but_types_keep_spelling() {
        let d = parse_domain(
            "(define (DOMAIN H) (:types householdObject) (:predicates (Held ?O - HOUSEHOLDOBJECT)))",
        )
        .unwrap();
        assert_eq!(d.name, "h");
        assert_eq!(d.predicates[0].name, "held");
        assert_eq!(d.predicates[0].params[0].name, "?o");
        assert_eq!(d.predicates[0].params[0].ty, "householdObject");
    }

    #[test]
    fn forall_is_rejected_with_feedback_text() {
        let text = "(define (domain d) (:types t) (:predicates (p ?x - t))
            (:action a :parameters () :precondition (forall (?x - t) (p ?x)) :effect (and)))";
        let err = parse_domain(text).unwrap_err();
        assert!(err
            .to_string()
            .starts_with("The precondition or effect contain the keyword 'forall' that is not supported"));
        let lenient = parse_domain_with(text, ParseMode::Lenient).unwrap();
        assert_eq!(lenient.actions[0].unsupported[0].keyword, "forall");
    }

    #[test]
    fn syntax_error_has_position_and_token() {
        let err = parse_domain("(define (domain d)\n  (:predicates (p ?x - t)\n").unwrap_err();
        assert!(matches!(err, PddlError::Syntax { line: 2, column: 3, .. }), "{err:?}");
        let err = parse_domain("(define (domain d) (:predicates (p ?1)))").unwrap_err();
        match err {
            PddlError::Syntax { token, .. } => assert_eq!(token, "?1"),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn well_typedness_is_enforced() {
        let base = "(define (domain d) (:types a b) (:predicates (p ?x - a))
            (:action act :parameters (?y - b) :precondition (and BODY) :effect (and)))";
        let err = parse_domain(&base.replace("BODY", "(p ?y)")).unwrap_err();
        assert!(matches!(err, PddlError::TypeMismatch { position: 1, .. }));
        let err = parse_domain(&base.replace("BODY", "(p ?y ?y)")).unwrap_err();
        assert!(matches!(err, PddlError::ArityMismatch { expected: 1, found: 2, .. }));
        let err = parse_domain(&base.replace("BODY", "(q ?y)")).unwrap_err();
        assert!(matches!(err, PddlError::UnknownPredicate(_)));
        let err = parse_domain(&base.replace("BODY", "(p ?z)")).unwrap_err();
        assert!(matches!(err, PddlError::TypeMismatch { .. } | PddlError::UnboundVariable { .. }));
    }

    #[test]
    fn inequality_becomes_constraint() {
        let d = parse_domain(
            "(define (domain d) (:requirements :strips :typing :equality) (:types t) (:predicates (p ?x - t))
             (:action a :parameters (?x ?y - t) :precondition (and (p ?x) (not (= ?x ?y))) :effect (p ?y)))",
        )
        .unwrap();
        let a = &d.actions[0];
        assert_eq!(a.constraints.len(), 1);
        assert!(!a.constraints[0].equal);
        assert_eq!(a.effects.len(), 1);
    }

    #[test]
    fn problem_rejects_undeclared_and_mistyped() {
        let d = parse_domain(PUT_DOWN).unwrap();
        let ok = "(define (problem p) (:domain blocks) (:objects a - block) (:init (robot-holding a)) (:goal (and)))";
        let p = parse_problem(ok, &d).unwrap();
        assert!(p.goal.is_empty());
        let err = parse_problem(&ok.replace("(robot-holding a)", "(robot-holding b)"), &d).unwrap_err();
        assert_eq!(err, PddlError::UnknownObject("b".into()));
        let err = parse_problem(&ok.replace("(robot-holding a)", "(holding a)"), &d).unwrap_err();
        assert_eq!(err, PddlError::UnknownPredicate("holding".into()));
    }

    #[test]
    fn plan_text_with_comments() {
        let plan = parse_plan("(pick-up A)\n; cost = 1 (unit cost)\n(stack a b)\n").unwrap();
        assert_eq!(plan.steps, vec![PlanStep::new("pick-up", ["a"]), PlanStep::new("stack", ["a", "b"])]);
    }
}
