mod common;

use common::{arb_grid, arb_raw_steps, grid, materialize};
use gridsynth::dsl::{eliminate_dels, execute, run_program, run_program_with, DslError, ProgramState, Value};
use gridsynth::{Grid, Program};
use proptest::prelude::*;

fn flip_h() -> Program {
    "color_of(N0)\nsub(N0.max_x, N0.x)\nset_pixels(N0, N2, N0.y, N1)\n".parse().unwrap()
}

#[test]
fn flip_reverses_every_row() {
    let g = grid(&[&[1, 2, 3], &[4, 5, 6]]);
    let out = run_program(&flip_h(), &[g]).unwrap();
    assert_eq!(out[0].to_rows(), vec![vec![3, 2, 1], vec![6, 5, 4]]);
}

#[test]
fn empty_program_returns_the_input() {
    let g = grid(&[&[7]]);
    assert_eq!(run_program(&Program::default(), &[g.clone()]).unwrap(), vec![g]);
}

#[test]
fn non_grid_result_is_an_error() {
    let p: Program = "equal(N0.c, 0)\n".parse().unwrap();
    let err = run_program(&p, &[grid(&[&[0]])]).unwrap_err();
    assert!(matches!(err, DslError::NonGridResult { .. }));
}

#[test]
fn examples_with_different_shapes_broadcast_independently() {
    let a = grid(&[&[1, 0]]);
    let b = grid(&[&[0], &[2], &[3]]);
    let out = run_program(&flip_h(), &[a, b.clone()]).unwrap();
    assert_eq!(out[0].to_rows(), vec![vec![0, 1]]);
    assert_eq!(out[1], b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn execution_is_deterministic(raw in arb_raw_steps(8), g in arb_grid(6)) {
        let p = materialize(&raw);
        let a = execute(&p, std::slice::from_ref(&g), 64);
        let b = execute(&p, std::slice::from_ref(&g), 64);
        match (a, b) {
            (Ok(x), Ok(y)) => prop_assert_eq!(x.slots().collect::<Vec<_>>(), y.slots().collect::<Vec<_>>()),
            (Err(x), Err(y)) => prop_assert_eq!(x, y),
            _ => prop_assert!(false, "outcomes differ"),
        }
    }

    #[test]
    fn examples_do_not_interact(raw in arb_raw_steps(8), g1 in arb_grid(5), g2 in arb_grid(5)) {
        let p = materialize(&raw);
        let joint = execute(&p, &[g1.clone(), g2.clone()], 64);
        let one = execute(&p, &[g1], 64);
        let two = execute(&p, &[g2], 64);
        match joint {
            Ok(state) => {
                let (one, two) = (one.unwrap(), two.unwrap());
                for (k, slot) in state.slots().enumerate() {
                    prop_assert_eq!(&slot[0], &one.slot(k)[0]);
                    prop_assert_eq!(&slot[1], &two.slot(k)[0]);
                }
            }
            Err(_) => prop_assert!(one.is_err() || two.is_err()),
        }
    }

    #[test]
    fn del_elimination_preserves_outputs(raw in arb_raw_steps(10), g in arb_grid(6)) {
        let p = materialize(&raw);
        if let Ok(out) = run_program_with(&p, std::slice::from_ref(&g), 64) {
            let q = eliminate_dels(&p).unwrap();
            prop_assert!(q.steps.iter().all(|s| !s.is_del()));
            prop_assert_eq!(run_program_with(&q, &[g], 64).unwrap(), out);
        }
    }

    #[test]
    fn program_text_round_trips(raw in arb_raw_steps(10)) {
        let p = materialize(&raw);
        let back: Program = p.to_string().parse().unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn flip_twice_is_identity(g in arb_grid(12)) {
        let twice = Program::new([flip_h().steps, flip_h().steps.iter().map(|s| {
            let mut s = s.clone();
            for a in &mut s.args {
                *a = match *a {
                    gridsynth::Arg::Ref(i) => gridsynth::Arg::Ref(i + 3),
                    gridsynth::Arg::RefAttr(i, at) => gridsynth::Arg::RefAttr(i + 3, at),
                    c => c,
                };
            }
            s
        }).collect()].concat());
        prop_assert_eq!(run_program(&twice, std::slice::from_ref(&g)).unwrap(), vec![g]);
    }

    #[test]
    fn color_of_matches_cells(g in arb_grid(10)) {
        let state = ProgramState::new(vec![g.clone()]).exec_step(&"color_of(N0)".parse().unwrap()).unwrap();
        let expected: Vec<i64> = g.cells().iter().map(|&c| c as i64).collect();
        prop_assert_eq!(&state.slot(1)[0], &Value::IntList(expected));
    }
}

#[test]
fn grid_offsets_do_not_affect_equality() {
    let a: Grid = grid(&[&[1]]).with_offset(3, 4);
    assert!(gridsynth::grids_equal(&a, &grid(&[&[1]])));
}
