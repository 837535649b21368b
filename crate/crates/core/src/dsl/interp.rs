//! Program state and step execution.
//!
//! Each slot holds one value per demonstration example; a step is applied to
//! every example independently. `del` removes a slot and shifts every higher
//! slot down by one.

use std::borrow::Cow;
use std::sync::Arc;

use super::{Arg, DslError, InstructionStep, Primitive, Program, Value};
use crate::grid::{grids_equal, AttrValue, Grid};

/// Default number of state-reference tokens.
pub const DEFAULT_MAX_REFS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgramState {
    inputs: Arc<Vec<Grid>>,
    slots: Vec<Arc<Vec<Value>>>,
    result: Option<usize>,
    max_refs: usize,
}

impl ProgramState {
    /// Root state: slot 0 holds the input grids.
    pub fn new(inputs: Vec<Grid>) -> Self {
        Self::with_max_refs(inputs, DEFAULT_MAX_REFS)
    }

    pub fn with_max_refs(inputs: Vec<Grid>, max_refs: usize) -> Self {
        let slot0: Vec<Value> = inputs.iter().cloned().map(Value::Grid).collect();
        ProgramState {
            inputs: Arc::new(inputs),
            slots: vec![Arc::new(slot0)],
            result: Some(0),
            max_refs,
        }
    }

    /// The original input grids, kept even if slot 0 is deleted.
    pub fn inputs(&self) -> &[Grid] {
        &self.inputs
    }

    pub fn num_examples(&self) -> usize {
        self.inputs.len()
    }

    pub fn num_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn max_refs(&self) -> usize {
        self.max_refs
    }

    pub fn slot(&self, index: usize) -> &[Value] {
        &self.slots[index]
    }

    pub fn slots(&self) -> impl Iterator<Item = &[Value]> {
        self.slots.iter().map(|s| s.as_slice())
    }

    /// Slot holding the output of the most recent non-del step.
    pub fn result_index(&self) -> Option<usize> {
        self.result
    }

    fn resolve<'a>(&'a self, step: &InstructionStep, arg: &Arg, example: usize) -> Result<Cow<'a, Value>, DslError> {
        let check = |i: usize| {
            if i < self.slots.len() {
                Ok(i)
            } else {
                Err(DslError::BadRef { index: i, len: self.slots.len() })
            }
        };
        match *arg {
            Arg::Const(k) => Ok(Cow::Owned(Value::Int(k as i64))),
            Arg::Ref(i) => Ok(Cow::Borrowed(&self.slots[check(i)?][example])),
            Arg::RefAttr(i, attr) => match &self.slots[check(i)?][example] {
                Value::Grid(g) => Ok(Cow::Owned(match g.attr(attr) {
                    AttrValue::List(l) => Value::IntList(l),
                    AttrValue::Int(v) => Value::Int(v),
                })),
                other => Err(DslError::TypeMismatch {
                    primitive: step.primitive,
                    detail: format!("attribute .{attr} of a {}", other.kind()),
                }),
            },
        }
    }

    /// Executes one step, returning the successor state.
    pub fn exec_step(&self, step: &InstructionStep) -> Result<ProgramState, DslError> {
        let arity = step.primitive.arity();
        if step.args.len() != arity {
            return Err(DslError::ArityMismatch {
                primitive: step.primitive,
                expected: arity,
                got: step.args.len(),
            });
        }

        if step.primitive == Primitive::Del {
            let index = match step.args[0] {
                Arg::Ref(i) => i,
                _ => {
                    return Err(DslError::TypeMismatch {
                        primitive: Primitive::Del,
                        detail: "del takes a plain reference".into(),
                    })
                }
            };
            if index >= self.slots.len() {
                return Err(DslError::BadRef { index, len: self.slots.len() });
            }
            let mut next = self.clone();
            next.slots.remove(index);
            next.result = match self.result {
                Some(r) if r == index => None,
                Some(r) if r > index => Some(r - 1),
                other => other,
            };
            return Ok(next);
        }

        if self.slots.len() >= self.max_refs {
            return Err(DslError::RefBudget { max: self.max_refs });
        }
        let mut values = Vec::with_capacity(self.num_examples());
        for example in 0..self.num_examples() {
            let args = step
                .args
                .iter()
                .map(|a| self.resolve(step, a, example))
                .collect::<Result<Vec<_>, _>>()?;
            let refs: Vec<&Value> = args.iter().map(|c| c.as_ref()).collect();
            values.push(step.primitive.apply(&refs)?);
        }
        let mut next = self.clone();
        next.slots.push(Arc::new(values));
        next.result = Some(next.slots.len() - 1);
        Ok(next)
    }

    /// The current result slot as grids, one per example.
    pub fn output_grids(&self) -> Result<Vec<&Grid>, DslError> {
        let index = self.result.ok_or(DslError::NoResult)?;
        self.slots[index]
            .iter()
            .map(|v| v.as_grid().ok_or(DslError::NonGridResult { kind: v.kind() }))
            .collect()
    }

    /// True if the result slot equals `targets` grid-for-grid.
    pub fn matches(&self, targets: &[Grid]) -> bool {
        match self.output_grids() {
            Ok(out) => {
                out.len() == targets.len() && out.iter().zip(targets).all(|(a, b)| grids_equal(a, b))
            }
            Err(_) => false,
        }
    }
}

/// Runs `program` from the root state over `inputs`.
pub fn run_program(program: &Program, inputs: &[Grid]) -> Result<Vec<Grid>, DslError> {
    run_program_with(program, inputs, DEFAULT_MAX_REFS)
}

pub fn run_program_with(program: &Program, inputs: &[Grid], max_refs: usize) -> Result<Vec<Grid>, DslError> {
    let state = execute(program, inputs, max_refs)?;
    Ok(state.output_grids()?.into_iter().cloned().collect())
}

/// Final state after executing every step of `program`.
pub fn execute(program: &Program, inputs: &[Grid], max_refs: usize) -> Result<ProgramState, DslError> {
    let mut state = ProgramState::with_max_refs(inputs.to_vec(), max_refs);
    for step in &program.steps {
        state = state.exec_step(step)?;
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(rows: &[&[u8]]) -> Grid {
        Grid::from_rows(rows).unwrap()
    }

    fn step(s: &str) -> InstructionStep {
        s.parse().unwrap()
    }

    #[test]
    fn equal_on_color_attribute() {
        let state = ProgramState::new(vec![grid(&[&[0, 1], &[3, 0]]), grid(&[&[5]])]);
        let next = state.exec_step(&step("equal(N0.c, 0)")).unwrap();
        assert_eq!(next.num_slots(), 2);
        assert_eq!(next.slot(1)[0], Value::BoolList(vec![true, false, false, true]));
        assert_eq!(next.slot(1)[1], Value::BoolList(vec![false]));
    }

    #[test]
    fn del_renumbers() {
        let state = ProgramState::new(vec![grid(&[&[0, 1], &[3, 0]])]);
        let s = state.exec_step(&step("equal(N0.c, 0)")).unwrap();
        let s = s.exec_step(&step("switch(N1, 0, 2)")).unwrap();
        let switched = s.slot(2).to_vec();
        let s = s.exec_step(&step("del(N1)")).unwrap();
        assert_eq!(s.num_slots(), 2);
        assert_eq!(s.slot(1), switched.as_slice());
        assert_eq!(s.result_index(), Some(1));
    }

    #[test]
    fn bad_ref() {
        let s = ProgramState::new(vec![grid(&[&[0]])]).exec_step(&step("identity(N0)")).unwrap();
        let err = s.exec_step(&step("equal(N7, 0)")).unwrap_err();
        assert_eq!(err, DslError::BadRef { index: 7, len: 2 });
    }

    #[test]
    fn del_of_result_leaves_no_output() {
        let s = ProgramState::new(vec![grid(&[&[0]])]).exec_step(&step("identity(N0)")).unwrap();
        let s = s.exec_step(&step("del(N1)")).unwrap();
        assert_eq!(s.output_grids().unwrap_err(), DslError::NoResult);
    }

    #[test]
    fn ref_budget() {
        let mut s = ProgramState::with_max_refs(vec![grid(&[&[0]])], 3);
        s = s.exec_step(&step("identity(N0)")).unwrap();
        s = s.exec_step(&step("identity(N0)")).unwrap();
        assert_eq!(s.exec_step(&step("identity(N0)")).unwrap_err(), DslError::RefBudget { max: 3 });
        // freeing a slot makes room again
        s = s.exec_step(&step("del(N1)")).unwrap();
        assert!(s.exec_step(&step("identity(N0)")).is_ok());
    }

    #[test]
    fn table_three_program() {
        let p: Program = "equal(N0.c, 0)\nswitch(N1, 0, 2)\ndel(N1)\nset_pixels(N0, N0.x, N0.y, N1)\n"
            .parse()
            .unwrap();
        let out = run_program(&p, &[grid(&[&[0, 1], &[3, 0]])]).unwrap();
        assert_eq!(out, vec![grid(&[&[0, 2], &[2, 0]])]);
    }

    #[test]
    fn empty_program_returns_inputs() {
        let g = grid(&[&[4, 5]]);
        assert_eq!(run_program(&Program::default(), std::slice::from_ref(&g)).unwrap(), vec![g]);
    }

    #[test]
    fn horizontal_flip() {
        let p: Program = "sub(N0.max_x, N0.x)\nset_pixels(N0, N1, N0.y, N0.c)\n".parse().unwrap();
        let out = run_program(&p, &[grid(&[&[1, 0], &[0, 0]])]).unwrap();
        assert_eq!(out, vec![grid(&[&[0, 1], &[0, 0]])]);
    }

    #[test]
    fn non_grid_result() {
        let p: Program = "equal(N0.c, 0)\n".parse().unwrap();
        let err = run_program(&p, &[grid(&[&[0]])]).unwrap_err();
        assert_eq!(err, DslError::NonGridResult { kind: "bool list" });
    }

    #[test]
    fn attribute_of_non_grid_is_type_error() {
        let s = ProgramState::new(vec![grid(&[&[0]])]).exec_step(&step("equal(N0.c, 0)")).unwrap();
        assert!(matches!(s.exec_step(&step("identity(N1.x)")), Err(DslError::TypeMismatch { .. })));
        assert!(matches!(s.exec_step(&step("del(N1.x)")), Err(DslError::TypeMismatch { .. })));
    }
}
