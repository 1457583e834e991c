//! Command line and local HTTP service over a pddlforge project.

pub mod api;
pub mod cli;
pub mod render;
pub mod service;
