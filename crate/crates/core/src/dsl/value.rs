use std::fmt;

use crate::grid::Grid;

/// A runtime value held by one example in one state slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Int(i64),
    Bool(bool),
    IntList(Vec<i64>),
    BoolList(Vec<bool>),
    Grid(Grid),
}

impl Value {
    pub fn kind(&self) -> &'static str {
        match self {
            Value::Int(_) => "int",
            Value::Bool(_) => "bool",
            Value::IntList(_) => "int list",
            Value::BoolList(_) => "bool list",
            Value::Grid(_) => "grid",
        }
    }

    pub fn as_grid(&self) -> Option<&Grid> {
        match self {
            Value::Grid(g) => Some(g),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::IntList(v) => write!(f, "{v:?}"),
            Value::BoolList(v) => write!(f, "{v:?}"),
            Value::Grid(g) => write!(f, "{g:?}"),
        }
    }
}
