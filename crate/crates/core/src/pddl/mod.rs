//! Typed-STRIPS PDDL: syntax tree, parser, canonical printer and the
//! structured action-block format used in construction dialogues.

pub mod action_block;
pub mod ast;
pub mod error;
pub mod parser;
pub mod printer;
pub mod sexpr;

pub use action_block::{format_action_block, parse_new_predicates, parse_action_block, parse_action_block_with, ActionBlock, BlockMode};
pub use ast::*;
pub use error::{ordinal, PddlError};
pub use parser::{
    check_action, check_domain, check_ground_atom, parse_domain, parse_domain_with, parse_goal, parse_plan,
    parse_problem, ParseMode,
};
pub use printer::{print_action, print_conjunction, print_domain, print_plan, print_problem};

/// Reflexive-transitive subtype test.
pub fn is_subtype(sub: &str, sup: &str, h: &TypeHierarchy) -> Result<bool, PddlError> {
    h.is_subtype(sub, sup)
}
