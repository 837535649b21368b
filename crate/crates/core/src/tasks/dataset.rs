use std::io::{self, Write};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{sample_instance, SamplerError, TaskSpec};
use crate::dsl::ProgramState;
use crate::token_codec::{encode_instruction, encode_state, TokenId, Vocabulary};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingSample {
    pub state_tokens: Vec<TokenId>,
    pub target_tokens: Vec<TokenId>,
}

/// Samples `n_examples` single-pair instances from random specs and emits one
/// sample per ground-truth step, teacher-forced on the ground-truth prefix.
pub fn emit_dataset<R: Rng + ?Sized>(
    specs: &[TaskSpec],
    n_examples: usize,
    vocab: &Vocabulary,
    rng: &mut R,
) -> Result<Vec<TrainingSample>, SamplerError> {
    let mut out = Vec::new();
    for _ in 0..n_examples {
        let spec = specs.choose(rng).expect("at least one task spec");
        let instance = sample_instance(spec, rng, 1)?;
        let (input, target) = &instance.demos[0];
        let targets = std::slice::from_ref(target);
        let mut state = ProgramState::with_max_refs(vec![input.clone()], vocab.max_refs());
        for step in &spec.ground_truth.steps {
            out.push(TrainingSample {
                state_tokens: encode_state(&state, targets),
                target_tokens: encode_instruction(step, vocab).expect("ground truth fits the vocabulary"),
            });
            state = state.exec_step(step).expect("ground truth executes on its own instance");
        }
    }
    Ok(out)
}

/// Writes one JSON object per line.
pub fn write_dataset<W: Write>(samples: &[TrainingSample], mut w: W) -> io::Result<()> {
    for s in samples {
        serde_json::to_writer(&mut w, s)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}
