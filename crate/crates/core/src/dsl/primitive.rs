//! The primitive catalog and per-example primitive semantics.
//!
//! Every primitive except `del` maps a fixed number of argument values to one
//! output value. Integer arguments broadcast: a scalar pairs with every element
//! of a list, two lists must have equal length.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{DslError, Value};
use crate::grid::{Attribute, AttrValue, Grid, GRID_HARD_CAP, NUM_COLORS};

/// Longest list a primitive may build.
pub const MAX_LIST_LEN: usize = GRID_HARD_CAP * GRID_HARD_CAP;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Primitive {
    Identity,
    Equal,
    NotEqual,
    GreaterThan,
    LessThan,
    Switch,
    SetPixels,
    ColorOf,
    Crop,
    Del,
    Add,
    Sub,
    Mul,
    ConstList,
    NewGrid,
}

impl Primitive {
    pub const ALL: [Primitive; 15] = [
        Primitive::Identity,
        Primitive::Equal,
        Primitive::NotEqual,
        Primitive::GreaterThan,
        Primitive::LessThan,
        Primitive::Switch,
        Primitive::SetPixels,
        Primitive::ColorOf,
        Primitive::Crop,
        Primitive::Del,
        Primitive::Add,
        Primitive::Sub,
        Primitive::Mul,
        Primitive::ConstList,
        Primitive::NewGrid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Primitive::Identity => "identity",
            Primitive::Equal => "equal",
            Primitive::NotEqual => "not_equal",
            Primitive::GreaterThan => "greater_than",
            Primitive::LessThan => "less_than",
            Primitive::Switch => "switch",
            Primitive::SetPixels => "set_pixels",
            Primitive::ColorOf => "color_of",
            Primitive::Crop => "crop",
            Primitive::Del => "del",
            Primitive::Add => "add",
            Primitive::Sub => "sub",
            Primitive::Mul => "mul",
            Primitive::ConstList => "const_list",
            Primitive::NewGrid => "new_grid",
        }
    }

    pub fn from_name(name: &str) -> Option<Primitive> {
        Primitive::ALL.iter().copied().find(|p| p.name() == name)
    }

    pub fn arity(self) -> usize {
        match self {
            Primitive::Identity | Primitive::ColorOf | Primitive::Del => 1,
            Primitive::Equal
            | Primitive::NotEqual
            | Primitive::GreaterThan
            | Primitive::LessThan
            | Primitive::Add
            | Primitive::Sub
            | Primitive::Mul
            | Primitive::ConstList => 2,
            Primitive::Switch | Primitive::Crop | Primitive::NewGrid => 3,
            Primitive::SetPixels => 4,
        }
    }

    /// Applies the primitive to one example's resolved arguments.
    pub fn apply(self, args: &[&Value]) -> Result<Value, DslError> {
        if args.len() != self.arity() {
            return Err(DslError::ArityMismatch {
                primitive: self,
                expected: self.arity(),
                got: args.len(),
            });
        }
        match self {
            Primitive::Identity => Ok(args[0].clone()),
            Primitive::Equal => compare(self, args[0], args[1], |a, b| a == b),
            Primitive::NotEqual => compare(self, args[0], args[1], |a, b| a != b),
            Primitive::GreaterThan => compare(self, args[0], args[1], |a, b| a > b),
            Primitive::LessThan => compare(self, args[0], args[1], |a, b| a < b),
            Primitive::Add => arith(self, args[0], args[1], i64::checked_add),
            Primitive::Sub => arith(self, args[0], args[1], i64::checked_sub),
            Primitive::Mul => arith(self, args[0], args[1], i64::checked_mul),
            Primitive::Switch => switch(args[0], args[1], args[2]),
            Primitive::SetPixels => set_pixels(args[0], args[1], args[2], args[3]),
            Primitive::ColorOf => {
                let g = grid_arg(self, args[0])?;
                match g.attr(Attribute::C) {
                    AttrValue::List(c) => Ok(Value::IntList(c)),
                    AttrValue::Int(_) => unreachable!("color attribute is a list"),
                }
            }
            Primitive::Crop => crop(args[0], args[1], args[2]),
            Primitive::ConstList => {
                let k = int_scalar(self, args[0])?;
                let n = int_scalar(self, args[1])?;
                if n < 0 || n as usize > MAX_LIST_LEN {
                    return Err(exec(self, format!("list length {n} out of range")));
                }
                Ok(Value::IntList(vec![k; n as usize]))
            }
            Primitive::NewGrid => {
                let w = int_scalar(self, args[0])?;
                let h = int_scalar(self, args[1])?;
                let fill = int_scalar(self, args[2])?;
                if w < 1 || h < 1 || !(0..NUM_COLORS as i64).contains(&fill) {
                    return Err(exec(self, format!("bad grid spec {w}x{h} fill {fill}")));
                }
                Grid::filled(w as usize, h as usize, fill as u8)
                    .map(Value::Grid)
                    .map_err(|e| exec(self, e.to_string()))
            }
            Primitive::Del => Err(exec(self, "del is handled by the interpreter".into())),
        }
    }
}

impl fmt::Display for Primitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn exec(primitive: Primitive, detail: String) -> DslError {
    DslError::Exec { primitive, detail }
}

fn mismatch(primitive: Primitive, expected: &str, got: &Value) -> DslError {
    DslError::TypeMismatch { primitive, detail: format!("expected {expected}, got {}", got.kind()) }
}

#[derive(Clone, Copy)]
enum Ints<'a> {
    Scalar(i64),
    List(&'a [i64]),
}

impl Ints<'_> {
    fn at(&self, i: usize) -> i64 {
        match self {
            Ints::Scalar(v) => *v,
            Ints::List(l) => l[i],
        }
    }

    fn len(&self) -> Option<usize> {
        match self {
            Ints::Scalar(_) => None,
            Ints::List(l) => Some(l.len()),
        }
    }
}

fn ints(primitive: Primitive, v: &Value) -> Result<Ints<'_>, DslError> {
    match v {
        Value::Int(i) => Ok(Ints::Scalar(*i)),
        Value::IntList(l) => Ok(Ints::List(l)),
        other => Err(mismatch(primitive, "int or int list", other)),
    }
}

fn int_scalar(primitive: Primitive, v: &Value) -> Result<i64, DslError> {
    match v {
        Value::Int(i) => Ok(*i),
        other => Err(mismatch(primitive, "int", other)),
    }
}

fn grid_arg(primitive: Primitive, v: &Value) -> Result<&Grid, DslError> {
    v.as_grid().ok_or_else(|| mismatch(primitive, "grid", v))
}

/// Common list length of the list-valued arguments, or `None` if all are scalars.
fn broadcast_len(primitive: Primitive, lens: &[Option<usize>]) -> Result<Option<usize>, DslError> {
    let mut out: Option<usize> = None;
    for len in lens.iter().flatten() {
        match out {
            None => out = Some(*len),
            Some(n) if n != *len => {
                return Err(exec(primitive, format!("list length mismatch: {n} vs {len}")));
            }
            _ => {}
        }
    }
    Ok(out)
}

fn compare(p: Primitive, a: &Value, b: &Value, f: impl Fn(i64, i64) -> bool) -> Result<Value, DslError> {
    let (a, b) = (ints(p, a)?, ints(p, b)?);
    match broadcast_len(p, &[a.len(), b.len()])? {
        None => Ok(Value::Bool(f(a.at(0), b.at(0)))),
        Some(n) => Ok(Value::BoolList((0..n).map(|i| f(a.at(i), b.at(i))).collect())),
    }
}

fn arith(
    p: Primitive,
    a: &Value,
    b: &Value,
    f: impl Fn(i64, i64) -> Option<i64>,
) -> Result<Value, DslError> {
    let (a, b) = (ints(p, a)?, ints(p, b)?);
    let op = |i: usize| f(a.at(i), b.at(i)).ok_or_else(|| exec(p, "integer overflow".into()));
    match broadcast_len(p, &[a.len(), b.len()])? {
        None => Ok(Value::Int(op(0)?)),
        Some(n) => Ok(Value::IntList((0..n).map(op).collect::<Result<_, _>>()?)),
    }
}

fn switch(cond: &Value, a: &Value, b: &Value) -> Result<Value, DslError> {
    let p = Primitive::Switch;
    match cond {
        Value::Bool(c) => Ok(if *c { a.clone() } else { b.clone() }),
        Value::BoolList(cs) => {
            let (a, b) = (ints(p, a)?, ints(p, b)?);
            broadcast_len(p, &[Some(cs.len()), a.len(), b.len()])?;
            Ok(Value::IntList(
                cs.iter().enumerate().map(|(i, &c)| if c { a.at(i) } else { b.at(i) }).collect(),
            ))
        }
        other => Err(mismatch(p, "bool list", other)),
    }
}

fn set_pixels(g: &Value, xs: &Value, ys: &Value, cs: &Value) -> Result<Value, DslError> {
    let p = Primitive::SetPixels;
    let grid = grid_arg(p, g)?;
    let (xs, ys, cs) = (ints(p, xs)?, ints(p, ys)?, ints(p, cs)?);
    let n = broadcast_len(p, &[xs.len(), ys.len(), cs.len()])?.unwrap_or(1);

    let mut max_x = -1i64;
    let mut max_y = -1i64;
    for i in 0..n {
        let (x, y, c) = (xs.at(i), ys.at(i), cs.at(i));
        if !(0..NUM_COLORS as i64).contains(&c) {
            return Err(exec(p, format!("color {c} out of range")));
        }
        if x >= 0 && y >= 0 {
            max_x = max_x.max(x);
            max_y = max_y.max(y);
        }
    }
    let mut out = grid.clone();
    if max_x >= GRID_HARD_CAP as i64 || max_y >= GRID_HARD_CAP as i64 {
        return Err(exec(p, format!("write at ({max_x}, {max_y}) exceeds the grid cap")));
    }
    if max_x >= 0 {
        out.extend_to(max_x as usize + 1, max_y as usize + 1)
            .map_err(|e| exec(p, e.to_string()))?;
    }
    for i in 0..n {
        let (x, y) = (xs.at(i), ys.at(i));
        // writes to negative coordinates fall off the grid
        if x >= 0 && y >= 0 {
            out.set(x as usize, y as usize, cs.at(i) as u8);
        }
    }
    Ok(Value::Grid(out))
}

fn crop(g: &Value, w: &Value, h: &Value) -> Result<Value, DslError> {
    let p = Primitive::Crop;
    let grid = grid_arg(p, g)?;
    let (w, h) = (int_scalar(p, w)?, int_scalar(p, h)?);
    if w < 1 || h < 1 || w as usize > grid.width() || h as usize > grid.height() {
        return Err(exec(
            p,
            format!("crop {w}x{h} outside {}x{} grid", grid.width(), grid.height()),
        ));
    }
    Ok(Value::Grid(grid.crop_top_left(w as usize, h as usize)))
}
