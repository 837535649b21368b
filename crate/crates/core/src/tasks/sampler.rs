use rand::Rng;

use super::{TaskId, TaskInstance, TaskSpec};
use crate::dsl::{execute, Arg, InstructionStep, Primitive, ProgramState, DEFAULT_MAX_REFS};
use crate::grid::{grids_equal, Attribute, Grid, NUM_COLORS};

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerParams {
    pub min_dim: usize,
    pub max_dim: usize,
    /// Probability that a cell is 0.
    pub background: f64,
    /// Rejected draws allowed before giving up.
    pub max_draws: usize,
    pub n_test: usize,
}

impl Default for SamplerParams {
    fn default() -> Self {
        SamplerParams { min_dim: 3, max_dim: 30, background: 0.6, max_draws: 1000, n_test: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SamplerError {
    #[error("{task}: no acceptable instance after {draws} draws")]
    Exhausted { task: TaskId, draws: usize },
    #[error("{task}: ground truth failed to execute: {detail}")]
    GroundTruth { task: TaskId, detail: String },
    #[error("need at least one demo pair")]
    NoDemos,
}

pub fn random_grid<R: Rng + ?Sized>(rng: &mut R, params: &SamplerParams) -> Grid {
    let w = rng.gen_range(params.min_dim..=params.max_dim);
    let h = rng.gen_range(params.min_dim..=params.max_dim);
    let rows: Vec<Vec<u8>> = (0..h)
        .map(|_| {
            (0..w)
                .map(|_| if rng.gen_bool(params.background) { 0 } else { rng.gen_range(1..NUM_COLORS as u8) })
                .collect()
        })
        .collect();
    Grid::from_rows(&rows).expect("sampled dims are in range")
}

/// Depth-1 programs that would make a pair trivially solvable.
fn trivial_programs() -> Vec<InstructionStep> {
    use Attribute::*;
    let mut out = vec![InstructionStep::new(Primitive::Identity, vec![Arg::Ref(0)])];
    for k in 0..NUM_COLORS as u8 {
        out.push(InstructionStep::new(
            Primitive::NewGrid,
            vec![Arg::RefAttr(0, Width), Arg::RefAttr(0, Height), Arg::Const(k)],
        ));
        out.push(InstructionStep::new(
            Primitive::SetPixels,
            vec![Arg::Ref(0), Arg::RefAttr(0, X), Arg::RefAttr(0, Y), Arg::Const(k)],
        ));
    }
    out
}

/// Draws a pair and applies the ground truth. Returns `None` when the pair is
/// degenerate: input equals target, a depth-1 screen program solves it, or a
/// proper prefix of the ground truth already produces the target.
fn draw_pair<R: Rng + ?Sized>(
    spec: &TaskSpec,
    rng: &mut R,
    params: &SamplerParams,
    screen: &[InstructionStep],
) -> Result<Option<(Grid, Grid)>, SamplerError> {
    let input = random_grid(rng, params);
    let target = execute(&spec.ground_truth, std::slice::from_ref(&input), DEFAULT_MAX_REFS)
        .and_then(|s| s.output_grids().map(|g| g[0].clone()))
        .map_err(|e| SamplerError::GroundTruth { task: spec.id, detail: e.to_string() })?;
    if grids_equal(&input, &target) {
        return Ok(None);
    }
    let targets = std::slice::from_ref(&target);
    let root = ProgramState::new(vec![input.clone()]);
    if screen.iter().any(|s| root.exec_step(s).is_ok_and(|st| st.matches(targets))) {
        return Ok(None);
    }
    let mut state = root;
    for step in &spec.ground_truth.steps[..spec.ground_truth.len().saturating_sub(1)] {
        state = state.exec_step(step).expect("ground truth executed above");
        if state.matches(targets) {
            return Ok(None);
        }
    }
    Ok(Some((input, target)))
}

pub fn sample_instance<R: Rng + ?Sized>(spec: &TaskSpec, rng: &mut R, n_demos: usize) -> Result<TaskInstance, SamplerError> {
    sample_instance_with(spec, rng, n_demos, &SamplerParams::default())
}

pub fn sample_instance_with<R: Rng + ?Sized>(
    spec: &TaskSpec,
    rng: &mut R,
    n_demos: usize,
    params: &SamplerParams,
) -> Result<TaskInstance, SamplerError> {
    if n_demos == 0 {
        return Err(SamplerError::NoDemos);
    }
    let screen = trivial_programs();
    let mut pairs = Vec::with_capacity(n_demos + params.n_test);
    let mut rejected = 0;
    while pairs.len() < n_demos + params.n_test {
        match draw_pair(spec, rng, params, &screen)? {
            Some(pair) => pairs.push(pair),
            None => {
                rejected += 1;
                if rejected >= params.max_draws {
                    return Err(SamplerError::Exhausted { task: spec.id, draws: rejected });
                }
            }
        }
    }
    let test = pairs.split_off(n_demos);
    Ok(TaskInstance { demos: pairs, test })
}
