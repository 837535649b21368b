use super::{check_task, Budget, SearchConfig, SearchError, SearchOutcome};
use crate::dsl::{Program, ProgramState};
use crate::grid::Grid;
use crate::guidance::{enumerate_steps, GuidanceModel, StateContext};

/// Argmax-only decoding: take the most probable step at every state, with no
/// queue and no backtracking.
pub fn greedy_rollout<M: GuidanceModel + ?Sized>(
    inputs: &[Grid],
    targets: &[Grid],
    model: &M,
    cfg: &SearchConfig,
) -> Result<SearchOutcome, SearchError> {
    check_task(inputs, targets)?;
    cfg.validate()?;
    let mut budget = Budget::new(cfg);
    let mut out = SearchOutcome::default();
    let mut state = ProgramState::with_max_refs(inputs.to_vec(), model.vocab().max_refs());
    let mut program = Program::default();

    loop {
        budget.charge();
        out.nodes += 1;
        if state.matches(targets) {
            out.solutions.push(program.clone());
            out.program = Some(program);
            break;
        }
        if program.len() >= cfg.max_depth || budget.spent() {
            break;
        }
        let ctx = StateContext::new(&state, targets, program.len());
        let found = enumerate_steps(model, &ctx, cfg.floor, cfg.candidate_cap)?;
        if found.truncated {
            out.truncated_expansions += 1;
        }
        let Some(best) = found.candidates.into_iter().next() else {
            out.exhausted = true;
            break;
        };
        if program.is_empty() {
            out.root_candidates.insert(best.tokens.clone());
        }
        match state.exec_step(&best.step) {
            Ok(next) => state = next,
            Err(_) => break,
        }
        program.steps.push(best.step);
    }
    out.elapsed = budget.elapsed();
    Ok(out)
}
