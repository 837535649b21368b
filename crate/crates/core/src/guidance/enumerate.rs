use super::{GuidanceError, GuidanceModel, StateContext};
use crate::dsl::InstructionStep;
use crate::token_codec::{decode_instruction, legal_next_tokens, TokenId};

/// Tokens at or below this conditional probability are not extended.
pub const DEFAULT_FLOOR: f64 = 1e-4;

pub const DEFAULT_CANDIDATE_CAP: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct StepCandidate {
    pub tokens: Vec<TokenId>,
    pub step: InstructionStep,
    /// Natural-log joint probability of `tokens` given the state.
    pub log_prob: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Enumeration {
    /// Sorted by descending `log_prob`; ties keep expansion order.
    pub candidates: Vec<StepCandidate>,
    /// Set when expansion stopped at the candidate cap.
    pub truncated: bool,
}

/// Expands the token tree depth-first, following every grammar-legal token
/// whose conditional probability exceeds `floor`, and collects the complete
/// (EOS-terminated) instruction steps.
pub fn enumerate_steps<M: GuidanceModel + ?Sized>(
    model: &M,
    state: &StateContext,
    floor: f64,
    cap: usize,
) -> Result<Enumeration, GuidanceError> {
    assert!((0.0..1.0).contains(&floor), "floor must be in [0, 1)");
    let vocab = model.vocab();
    let eos = vocab.eos();
    let mut out = Enumeration::default();
    let mut stack: Vec<(Vec<TokenId>, f64)> = vec![(Vec::new(), 0.0)];

    'outer: while let Some((prefix, log_prob)) = stack.pop() {
        let dist = model.next_token_dist(&state.with_prefix(&prefix))?;
        if dist.is_empty() {
            continue;
        }
        let legal = match legal_next_tokens(&prefix, vocab, state.n_slots) {
            Ok(l) => l,
            Err(_) => continue,
        };
        let mut children = Vec::new();
        for (token, p) in dist.iter() {
            if p <= floor || p <= 0.0 || legal.binary_search(&token).is_err() {
                continue;
            }
            let mut tokens = prefix.clone();
            tokens.push(token);
            let lp = log_prob + p.ln().min(0.0);
            if token == eos {
                let Ok(step) = decode_instruction(&tokens, vocab) else { continue };
                if out.candidates.len() >= cap {
                    out.truncated = true;
                    break 'outer;
                }
                out.candidates.push(StepCandidate { tokens, step, log_prob: lp });
            } else {
                children.push((tokens, lp));
            }
        }
        // smallest token id is expanded first
        stack.extend(children.into_iter().rev());
    }
    out.candidates.sort_by(|a, b| b.log_prob.total_cmp(&a.log_prob));
    Ok(out)
}
