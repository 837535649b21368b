//! Ground-truth guidance for known tasks.
//!
//! The oracle only sees the serialized state. It recovers the demonstration
//! inputs and targets from the tokens, replays every ground-truth program
//! that solves them, and answers with the next ground-truth step whenever the
//! queried state's fingerprint matches one of the replayed intermediate states.

use std::collections::HashMap;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::uniform::uniform_over_legal;
use super::{Distribution, GuidanceContext, GuidanceError, GuidanceModel, StateContext};
use crate::dsl::{Arg, InstructionStep, Primitive, Program, ProgramState};
use crate::grid::Attribute;
use crate::token_codec::{decode_state, encode_instruction, encode_state, fingerprint, TokenId, Vocabulary};

/// Where a queried state sits relative to the known ground truths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleLookup {
    /// The state lies on a ground-truth path; these are the distinct next steps.
    OnPath(Vec<InstructionStep>),
    OffPath,
}

type PathIndex = HashMap<u64, Vec<InstructionStep>>;

pub struct Oracle {
    vocab: Vocabulary,
    programs: Vec<(String, Program)>,
    instances: Mutex<HashMap<u64, Arc<PathIndex>>>,
    lookups: Mutex<HashMap<u64, Arc<OracleLookup>>>,
    ambiguous: AtomicUsize,
}

/// Oracle over `(task id, ground-truth program)` pairs.
pub fn build_oracle(suite: &[(String, Program)], vocab: Vocabulary) -> Oracle {
    Oracle::new(suite.to_vec(), vocab)
}

impl Oracle {
    pub fn new(programs: Vec<(String, Program)>, vocab: Vocabulary) -> Self {
        Oracle {
            vocab,
            programs,
            instances: Mutex::new(HashMap::new()),
            lookups: Mutex::new(HashMap::new()),
            ambiguous: AtomicUsize::new(0),
        }
    }

    pub fn programs(&self) -> &[(String, Program)] {
        &self.programs
    }

    /// Number of fingerprints at which ground truths disagreed on the next step.
    pub fn ambiguous_count(&self) -> usize {
        self.ambiguous.load(Ordering::Relaxed)
    }

    fn index_for(&self, tokens: &[TokenId]) -> Option<Arc<PathIndex>> {
        let decoded = decode_state(tokens).ok()?;
        let key = {
            let mut h = DefaultHasher::new();
            decoded.inputs.hash(&mut h);
            decoded.targets.hash(&mut h);
            h.finish()
        };
        if let Some(index) = self.instances.lock().unwrap().get(&key) {
            return Some(index.clone());
        }
        let mut index = PathIndex::new();
        for (_, program) in &self.programs {
            let mut state = ProgramState::with_max_refs(decoded.inputs.clone(), self.vocab.max_refs());
            let mut path = Vec::with_capacity(program.len());
            let mut ok = true;
            for step in &program.steps {
                if encode_instruction(step, &self.vocab).is_err() {
                    ok = false;
                    break;
                }
                path.push(fingerprint(&encode_state(&state, &decoded.targets)));
                match state.exec_step(step) {
                    Ok(next) => state = next,
                    Err(_) => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok || !state.matches(&decoded.targets) {
                continue;
            }
            for (fp, step) in path.into_iter().zip(&program.steps) {
                let entry = index.entry(fp).or_default();
                if !entry.contains(step) {
                    if !entry.is_empty() {
                        self.ambiguous.fetch_add(1, Ordering::Relaxed);
                    }
                    entry.push(step.clone());
                }
            }
        }
        let index = Arc::new(index);
        self.instances.lock().unwrap().insert(key, index.clone());
        Some(index)
    }

    pub fn lookup(&self, state: &StateContext) -> Arc<OracleLookup> {
        if let Some(hit) = self.lookups.lock().unwrap().get(&state.fingerprint) {
            return hit.clone();
        }
        let result = match self.index_for(&state.state_tokens) {
            Some(index) => match index.get(&state.fingerprint) {
                Some(steps) => OracleLookup::OnPath(steps.clone()),
                None => OracleLookup::OffPath,
            },
            None => OracleLookup::OffPath,
        };
        let result = Arc::new(result);
        self.lookups.lock().unwrap().insert(state.fingerprint, result.clone());
        result
    }
}

/// Next-token distribution of a weighted set of complete token sequences,
/// conditioned on `prefix`. Empty if no sequence extends the prefix.
pub fn mixture_distribution(weighted: &[(Vec<TokenId>, f64)], prefix: &[TokenId]) -> Distribution {
    let matching = || {
        weighted
            .iter()
            .filter(|(seq, w)| *w > 0.0 && seq.len() > prefix.len() && seq.starts_with(prefix))
    };
    let total: f64 = matching().map(|(_, w)| w).sum();
    let mut dist = Distribution::new();
    if total <= 0.0 {
        return dist;
    }
    for (seq, w) in matching() {
        dist.add(seq[prefix.len()], w / total);
    }
    dist
}

impl GuidanceModel for Oracle {
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn next_token_dist(&self, ctx: &GuidanceContext<'_>) -> Result<Distribution, GuidanceError> {
        if let OracleLookup::OnPath(steps) = self.lookup(ctx.state).as_ref() {
            let weighted: Vec<(Vec<TokenId>, f64)> = steps
                .iter()
                .filter_map(|s| encode_instruction(s, &self.vocab).ok())
                .map(|t| (t, 1.0))
                .collect();
            let dist = mixture_distribution(&weighted, ctx.prefix);
            if !dist.is_empty() {
                return Ok(dist);
            }
        }
        Ok(uniform_over_legal(&self.vocab, ctx))
    }
}

/// A degraded oracle.
///
/// At every on-path state the model mixes the ground-truth step with one
/// random distractor step per other catalog primitive:
///
/// * `noise`: total mass given to distractors (the ground truth keeps `1 - noise`);
/// * `confusion`: chance that one distractor swaps weights with the ground
///   truth, putting the argmax off-path;
/// * `miss`: chance that the ground-truth step gets no mass at all.
///
/// Per-state randomness is derived from the state fingerprint and `seed`, so
/// answers are deterministic. Off-path states get an empty distribution.
pub struct NoisyOracle {
    oracle: Oracle,
    noise: f64,
    confusion: f64,
    miss: f64,
    seed: u64,
}

impl NoisyOracle {
    pub fn new(oracle: Oracle, noise: f64, seed: u64) -> Self {
        assert!((0.0..1.0).contains(&noise), "noise must be in [0, 1)");
        NoisyOracle { oracle, noise, confusion: noise, miss: 0.0, seed }
    }

    pub fn with_confusion(mut self, confusion: f64) -> Self {
        self.confusion = confusion;
        self
    }

    pub fn with_miss(mut self, miss: f64) -> Self {
        self.miss = miss;
        self
    }

    pub fn oracle(&self) -> &Oracle {
        &self.oracle
    }

    /// The weighted step set behind the token distribution at `state`.
    pub fn weighted_steps(&self, state: &StateContext) -> Vec<(Vec<TokenId>, f64)> {
        let OracleLookup::OnPath(truth) = self.oracle.lookup(state).as_ref().clone() else {
            return Vec::new();
        };
        let vocab = &self.oracle.vocab;
        let truth: Vec<Vec<TokenId>> = truth.iter().filter_map(|s| encode_instruction(s, vocab).ok()).collect();
        if truth.is_empty() {
            return Vec::new();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(state.fingerprint ^ self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let confused = rng.gen::<f64>() < self.confusion;
        let missed = rng.gen::<f64>() < self.miss;

        let heads: Vec<TokenId> = truth.iter().map(|t| t[0]).collect();
        let n_refs = state.n_slots.min(vocab.max_refs()).max(1);
        let mut distractors: Vec<Vec<TokenId>> = Vec::new();
        for &p in vocab.primitives() {
            let head = vocab.primitive(p).expect("catalog primitive");
            if heads.contains(&head) {
                continue;
            }
            let step = random_step(&mut rng, p, n_refs);
            if let Ok(tokens) = encode_instruction(&step, vocab) {
                distractors.push(tokens);
            }
        }
        let pick = if distractors.is_empty() { 0 } else { rng.gen_range(0..distractors.len()) };

        let m = distractors.len();
        let mut truth_total = if m == 0 { 1.0 } else { 1.0 - self.noise };
        let mut distractor_w = vec![if m == 0 { 0.0 } else { self.noise / m as f64 }; m];
        if confused && m > 0 {
            std::mem::swap(&mut truth_total, &mut distractor_w[pick]);
        }
        if missed {
            truth_total = 0.0;
        }
        let k = truth.len() as f64;
        truth
            .into_iter()
            .map(|t| (t, truth_total / k))
            .chain(distractors.into_iter().zip(distractor_w))
            .collect()
    }
}

fn random_step(rng: &mut ChaCha8Rng, primitive: Primitive, n_refs: usize) -> InstructionStep {
    let args = (0..primitive.arity())
        .map(|_| {
            if primitive == Primitive::Del {
                return Arg::Ref(rng.gen_range(0..n_refs));
            }
            match rng.gen_range(0..3) {
                0 => Arg::Const(rng.gen_range(0..=9)),
                1 => Arg::Ref(rng.gen_range(0..n_refs)),
                _ => Arg::RefAttr(rng.gen_range(0..n_refs), Attribute::ALL[rng.gen_range(0..Attribute::ALL.len())]),
            }
        })
        .collect();
    InstructionStep::new(primitive, args)
}

impl GuidanceModel for NoisyOracle {
    fn vocab(&self) -> &Vocabulary {
        &self.oracle.vocab
    }

    fn next_token_dist(&self, ctx: &GuidanceContext<'_>) -> Result<Distribution, GuidanceError> {
        Ok(mixture_distribution(&self.weighted_steps(ctx.state), ctx.prefix))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixture_conditions_on_prefix() {
        let w = vec![(vec![1, 2, 3], 0.6), (vec![1, 4, 3], 0.2), (vec![5, 3], 0.2)];
        let root = mixture_distribution(&w, &[]);
        assert!((root.get(1) - 0.8).abs() < 1e-12);
        assert!((root.get(5) - 0.2).abs() < 1e-12);
        let after = mixture_distribution(&w, &[1]);
        assert!((after.get(2) - 0.75).abs() < 1e-12);
        assert!((after.get(4) - 0.25).abs() < 1e-12);
        assert!(mixture_distribution(&w, &[9]).is_empty());
        assert!(mixture_distribution(&w, &[5, 3]).is_empty());
    }
}
