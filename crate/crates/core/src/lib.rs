//! Execution-guided program synthesis for ARC-style grid tasks.
//!
//! Programs are straight-line sequences of instruction steps over a small
//! grid DSL ([`dsl`]). A guidance model ([`guidance`]) proposes the next step
//! token by token, conditioned on the serialized intermediate state
//! ([`token_codec`]), and a best-first search ([`search`]) orders partial
//! programs by joint probability until one reproduces the target grids.

pub mod cli;
pub mod dsl;
pub mod grid;
pub mod guidance;
pub mod search;
pub mod tasks;
pub mod token_codec;

pub use dsl::{run_program, Arg, InstructionStep, Primitive, Program, ProgramState, Value};
pub use grid::{grids_equal, Attribute, Grid};
