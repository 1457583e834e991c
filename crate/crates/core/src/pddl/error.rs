use thiserror::Error;

use super::ast::Section;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PddlError {
    #[error("syntax error at line {line}, column {column} near '{token}': {message}")]
    Syntax {
        line: usize,
        column: usize,
        token: String,
        message: String,
    },

    #[error("The precondition or effect contain the keyword '{keyword}' that is not supported in a standard STRIPS style model. Please express the same logic in a simplified way. You can come up with new predicates if needed (but note that you should use existing predicates as much as possible).")]
    UnsupportedFeature { keyword: String },

    #[error("unknown type '{0}'")]
    UnknownType(String),

    #[error("cyclic type hierarchy through '{0}'")]
    CyclicTypes(String),

    #[error("unknown predicate '{0}'")]
    UnknownPredicate(String),

    #[error("unknown object '{0}'")]
    UnknownObject(String),

    #[error("duplicate {kind} '{name}'")]
    DuplicateName { kind: &'static str, name: String },

    #[error("predicate name '{0}' clashes with a type name")]
    PredicateTypeClash(String),

    #[error("'{predicate}' expects {expected} argument(s) but {found} were given")]
    ArityMismatch {
        predicate: String,
        expected: usize,
        found: usize,
    },

    #[error("the {pos} parameter of '{predicate}' should be a {expected}, but a {found} was given", pos = ordinal(*.position))]
    TypeMismatch {
        predicate: String,
        position: usize,
        expected: String,
        found: String,
    },

    #[error("variable {variable} in action '{action}' is not a declared parameter")]
    UnboundVariable { action: String, variable: String },

    #[error("missing section '{0}'")]
    MissingSection(String),

    #[error("in section '{section}': {source}")]
    SnippetSyntax {
        section: Section,
        #[source]
        source: Box<PddlError>,
    },
}

impl PddlError {
    pub(crate) fn syntax(
        line: usize,
        column: usize,
        token: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        PddlError::Syntax {
            line,
            column,
            token: token.into(),
            message: message.into(),
        }
    }
}

/// `1` -> "first", `2` -> "second", ... falling back to "12th".
pub fn ordinal(n: usize) -> String {
    const WORDS: [&str; 10] = [
        "first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth",
        "tenth",
    ];
    if (1..=WORDS.len()).contains(&n) {
        return WORDS[n - 1].to_string();
    }
    let suffix = match (n % 10, n % 100) {
        (1, r) if r != 11 => "st",
        (2, r) if r != 12 => "nd",
        (3, r) if r != 13 => "rd",
        _ => "th",
    };
    format!("{n}{suffix}")
}
