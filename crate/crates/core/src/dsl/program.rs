//! Instruction steps, programs, and their line-oriented text form.
//!
//! One instruction per line: `set_pixels(N0, N0.x, N0.y, N1)`. References
//! are `N<index>`, optionally followed by `.<attribute>`; constants are 0..=9.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Primitive;
use crate::grid::Attribute;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Arg {
    Const(u8),
    Ref(usize),
    RefAttr(usize, Attribute),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InstructionStep {
    pub primitive: Primitive,
    pub args: Vec<Arg>,
}

impl InstructionStep {
    pub fn new(primitive: Primitive, args: Vec<Arg>) -> Self {
        InstructionStep { primitive, args }
    }

    pub fn is_del(&self) -> bool {
        self.primitive == Primitive::Del
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Program {
    pub steps: Vec<InstructionStep>,
}

impl Program {
    pub fn new(steps: Vec<InstructionStep>) -> Self {
        Program { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ProgramParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arg::Const(k) => write!(f, "{k}"),
            Arg::Ref(i) => write!(f, "N{i}"),
            Arg::RefAttr(i, a) => write!(f, "N{i}.{a}"),
        }
    }
}

impl fmt::Display for InstructionStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.primitive)?;
        for (i, arg) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{arg}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for step in &self.steps {
            writeln!(f, "{step}")?;
        }
        Ok(())
    }
}

fn parse_arg(text: &str) -> Result<Arg, String> {
    if let Some(rest) = text.strip_prefix('N') {
        let (idx, attr) = match rest.split_once('.') {
            Some((i, a)) => (i, Some(a)),
            None => (rest, None),
        };
        if idx.is_empty() || !idx.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("bad reference `{text}`"));
        }
        let idx: usize = idx.parse().map_err(|_| format!("bad reference `{text}`"))?;
        return match attr {
            None => Ok(Arg::Ref(idx)),
            Some(a) => Attribute::from_name(a)
                .map(|a| Arg::RefAttr(idx, a))
                .ok_or_else(|| format!("unknown attribute `{a}`")),
        };
    }
    match text.parse::<u8>() {
        Ok(k) if k <= 9 && text.len() == 1 => Ok(Arg::Const(k)),
        _ => Err(format!("bad argument `{text}`")),
    }
}

fn parse_step(line: &str) -> Result<InstructionStep, String> {
    let line = line.trim();
    let open = line.find('(').ok_or("missing `(`")?;
    let body = line[open + 1..].strip_suffix(')').ok_or("missing `)`")?;
    let name = line[..open].trim();
    let primitive = Primitive::from_name(name).ok_or_else(|| format!("unknown primitive `{name}`"))?;
    let args = if body.trim().is_empty() {
        Vec::new()
    } else {
        body.split(',').map(|a| parse_arg(a.trim())).collect::<Result<Vec<_>, _>>()?
    };
    if args.len() != primitive.arity() {
        return Err(format!(
            "{primitive} takes {} arguments, got {}",
            primitive.arity(),
            args.len()
        ));
    }
    Ok(InstructionStep { primitive, args })
}

impl FromStr for InstructionStep {
    type Err = ProgramParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_step(s).map_err(|message| ProgramParseError { line: 1, message })
    }
}

impl FromStr for Program {
    type Err = ProgramParseError;

    /// Blank lines and `#` comments are skipped.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut steps = Vec::new();
        for (i, line) in s.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            steps.push(parse_step(trimmed).map_err(|message| ProgramParseError { line: i + 1, message })?);
        }
        Ok(Program { steps })
    }
}
