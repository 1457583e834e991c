//! Construction, auditing, correction and use of PDDL world models through
//! a language-model conversation loop.

pub mod audit;
pub mod builder;
pub mod generators;
pub mod correction;
pub mod llm;
pub mod nl;
pub mod orchestrator;
pub mod pddl;
pub mod planner;
pub mod registry;
pub mod state;
pub mod templates;
pub mod workspace;
