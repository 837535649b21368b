//! Guidance models: next-token distributions over the instruction vocabulary,
//! conditioned on the serialized program state and the step decoded so far.

mod enumerate;
mod oracle;
pub mod protocol;
mod remote;
mod uniform;

use std::collections::BTreeMap;
use std::sync::Arc;

pub use enumerate::{enumerate_steps, Enumeration, StepCandidate, DEFAULT_CANDIDATE_CAP, DEFAULT_FLOOR};
pub use oracle::{build_oracle, mixture_distribution, NoisyOracle, Oracle, OracleLookup};
pub use remote::RemoteModel;
pub use uniform::Uniform;

use crate::dsl::ProgramState;
use crate::grid::Grid;
use crate::token_codec::{encode_state, fingerprint, TokenId, Vocabulary};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GuidanceError {
    #[error("remote guidance unavailable: {0}")]
    RemoteUnavailable(String),
    #[error("guidance protocol error: {0}")]
    Protocol(String),
    #[error("vocabulary manifest mismatch (local {local}, remote {remote})")]
    ManifestMismatch { local: String, remote: String },
}

/// Sparse next-token distribution; absent tokens have probability zero.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Distribution {
    probs: BTreeMap<TokenId, f64>,
}

impl Distribution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn point(token: TokenId) -> Self {
        Distribution { probs: BTreeMap::from([(token, 1.0)]) }
    }

    /// Equal mass on each of `tokens`.
    pub fn uniform(tokens: &[TokenId]) -> Self {
        let p = 1.0 / tokens.len().max(1) as f64;
        Distribution { probs: tokens.iter().map(|&t| (t, p)).collect() }
    }

    /// Adds `p` to the probability of `token`. Non-positive mass is ignored.
    pub fn add(&mut self, token: TokenId, p: f64) {
        if p > 0.0 {
            *self.probs.entry(token).or_insert(0.0) += p;
        }
    }

    pub fn get(&self, token: TokenId) -> f64 {
        self.probs.get(&token).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (TokenId, f64)> + '_ {
        self.probs.iter().map(|(&t, &p)| (t, p))
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    /// Scales the distribution to sum to one (no-op when empty).
    pub fn normalized(mut self) -> Self {
        let total = self.total();
        if total > 0.0 {
            for p in self.probs.values_mut() {
                *p /= total;
            }
        }
        self
    }

    /// Non-negative entries summing to at most `1 + 1e-6`.
    pub fn is_valid(&self) -> bool {
        self.probs.values().all(|&p| p >= 0.0 && p.is_finite()) && self.total() <= 1.0 + 1e-6
    }

    pub fn argmax(&self) -> Option<(TokenId, f64)> {
        // ties go to the smaller token id
        self.iter().fold(None, |best, (t, p)| match best {
            Some((_, bp)) if bp >= p => best,
            _ => Some((t, p)),
        })
    }
}

/// State-level part of a guidance query, computed once per search node.
#[derive(Debug, Clone)]
pub struct StateContext {
    pub state_tokens: Arc<Vec<TokenId>>,
    pub fingerprint: u64,
    pub n_slots: usize,
    /// Number of steps executed to reach this state (0 at the root).
    pub depth: usize,
}

impl StateContext {
    pub fn new(state: &ProgramState, targets: &[Grid], depth: usize) -> Self {
        let tokens = encode_state(state, targets);
        StateContext {
            fingerprint: fingerprint(&tokens),
            state_tokens: Arc::new(tokens),
            n_slots: state.num_slots(),
            depth,
        }
    }

    pub fn with_prefix<'a>(&'a self, prefix: &'a [TokenId]) -> GuidanceContext<'a> {
        GuidanceContext { state: self, prefix }
    }
}

/// A guidance query: the state plus the tokens of the step decoded so far.
#[derive(Debug, Clone, Copy)]
pub struct GuidanceContext<'a> {
    pub state: &'a StateContext,
    pub prefix: &'a [TokenId],
}

pub trait GuidanceModel: Send + Sync {
    fn vocab(&self) -> &Vocabulary;

    fn next_token_dist(&self, ctx: &GuidanceContext<'_>) -> Result<Distribution, GuidanceError>;

    /// Whether repeated identical queries always give identical answers.
    fn is_deterministic(&self) -> bool {
        true
    }
}

impl<M: GuidanceModel + ?Sized> GuidanceModel for &M {
    fn vocab(&self) -> &Vocabulary {
        (**self).vocab()
    }

    fn next_token_dist(&self, ctx: &GuidanceContext<'_>) -> Result<Distribution, GuidanceError> {
        (**self).next_token_dist(ctx)
    }

    fn is_deterministic(&self) -> bool {
        (**self).is_deterministic()
    }
}

impl<M: GuidanceModel + ?Sized> GuidanceModel for Box<M> {
    fn vocab(&self) -> &Vocabulary {
        (**self).vocab()
    }

    fn next_token_dist(&self, ctx: &GuidanceContext<'_>) -> Result<Distribution, GuidanceError> {
        (**self).next_token_dist(ctx)
    }

    fn is_deterministic(&self) -> bool {
        (**self).is_deterministic()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distribution_basics() {
        let mut d = Distribution::new();
        d.add(3, 0.25);
        d.add(1, 0.25);
        d.add(3, 0.25);
        d.add(7, 0.0);
        assert_eq!(d.len(), 2);
        assert_eq!(d.get(3), 0.5);
        assert_eq!(d.get(7), 0.0);
        assert_eq!(d.argmax(), Some((3, 0.5)));
        assert!(d.is_valid());
        let n = d.normalized();
        assert!((n.total() - 1.0).abs() < 1e-12);
        assert!((n.get(1) - 1.0 / 3.0).abs() < 1e-12);
    }
}
