//! The straight-line instruction-step DSL.

mod interp;
mod primitive;
mod program;
mod rewrite;
mod value;

pub use interp::{execute, run_program, run_program_with, ProgramState, DEFAULT_MAX_REFS};
pub use primitive::{Primitive, MAX_LIST_LEN};
pub use program::{Arg, InstructionStep, Program, ProgramParseError};
pub use rewrite::eliminate_dels;
pub use value::Value;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DslError {
    #[error("reference N{index} out of range for a state with {len} slots")]
    BadRef { index: usize, len: usize },
    #[error("{primitive} takes {expected} arguments, got {got}")]
    ArityMismatch { primitive: Primitive, expected: usize, got: usize },
    #[error("{primitive}: {detail}")]
    TypeMismatch { primitive: Primitive, detail: String },
    #[error("{primitive} failed: {detail}")]
    Exec { primitive: Primitive, detail: String },
    #[error("state already holds the maximum of {max} slots")]
    RefBudget { max: usize },
    #[error("program result is a {kind}, not a grid")]
    NonGridResult { kind: &'static str },
    #[error("program result slot was deleted")]
    NoResult,
}
