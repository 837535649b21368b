#![allow(dead_code)]

use gridsynth::dsl::{Arg, InstructionStep, Primitive, Program};
use gridsynth::{Attribute, Grid};
use proptest::prelude::*;

pub fn grid(rows: &[&[u8]]) -> Grid {
    Grid::from_rows(rows).unwrap()
}

pub fn arb_grid(max_dim: usize) -> impl Strategy<Value = Grid> {
    (1..=max_dim, 1..=max_dim)
        .prop_flat_map(|(w, h)| prop::collection::vec(prop::collection::vec(0u8..10, w), h))
        .prop_map(|rows| Grid::from_rows(&rows).unwrap())
}

/// Raw material for one step: primitive index and per-argument choices.
pub type RawStep = (usize, Vec<(u8, usize, usize)>);

pub fn arb_raw_steps(max_len: usize) -> impl Strategy<Value = Vec<RawStep>> {
    prop::collection::vec((0..Primitive::ALL.len(), prop::collection::vec((0u8..3, 0usize..16, 0usize..9), 4)), 0..=max_len)
}

/// Turns raw choices into a program whose references are always in range.
pub fn materialize(raw: &[RawStep]) -> Program {
    let mut slots = 1;
    let mut steps = Vec::new();
    for (p, choices) in raw {
        let primitive = Primitive::ALL[*p];
        if primitive == Primitive::Del {
            if slots == 1 {
                continue;
            }
            steps.push(InstructionStep::new(primitive, vec![Arg::Ref(choices[0].1 % slots)]));
            slots -= 1;
            continue;
        }
        let args = choices[..primitive.arity()]
            .iter()
            .map(|&(kind, i, a)| match kind {
                0 => Arg::Const((i % 10) as u8),
                1 => Arg::Ref(i % slots),
                _ => Arg::RefAttr(i % slots, Attribute::ALL[a]),
            })
            .collect();
        steps.push(InstructionStep::new(primitive, args));
        slots += 1;
    }
    Program::new(steps)
}
