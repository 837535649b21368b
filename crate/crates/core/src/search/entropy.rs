use std::hash::{DefaultHasher, Hash, Hasher};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SearchConfig;
use crate::guidance::{Distribution, GuidanceContext, GuidanceError, GuidanceModel};
use crate::token_codec::{legal_next_tokens, Vocabulary};

/// Wraps a model so that, at root-state queries only, a random subset of the
/// grammar-legal next tokens gets extra probability mass before
/// renormalization. The subset is a pure function of the draw and the prefix,
/// so repeated queries agree.
pub struct EntropyBoost<M> {
    inner: M,
    boost: f64,
    fraction: f64,
    draw: u64,
}

impl<M: GuidanceModel> EntropyBoost<M> {
    pub fn new(inner: M, boost: f64, fraction: f64, draw: u64) -> Self {
        EntropyBoost { inner, boost, fraction, draw }
    }
}

/// Wraps `model` for one restart, drawing its token selection from `rng`.
pub fn entropy_restart<'m, M: GuidanceModel + ?Sized>(
    model: &'m M,
    cfg: &SearchConfig,
    rng: &mut ChaCha8Rng,
) -> EntropyBoost<&'m M> {
    EntropyBoost::new(model, cfg.entropy_boost, cfg.entropy_token_fraction, rng.gen())
}

impl<M: GuidanceModel> GuidanceModel for EntropyBoost<M> {
    fn vocab(&self) -> &Vocabulary {
        self.inner.vocab()
    }

    fn is_deterministic(&self) -> bool {
        self.inner.is_deterministic()
    }

    fn next_token_dist(&self, ctx: &GuidanceContext<'_>) -> Result<Distribution, GuidanceError> {
        let base = self.inner.next_token_dist(ctx)?;
        if ctx.state.depth != 0 || self.boost <= 0.0 {
            return Ok(base);
        }
        let legal = match legal_next_tokens(ctx.prefix, self.vocab(), ctx.state.n_slots) {
            Ok(l) if !l.is_empty() => l,
            _ => return Ok(base),
        };
        let count = ((self.fraction * legal.len() as f64).round() as usize).clamp(1, legal.len());
        let mut h = DefaultHasher::new();
        ctx.prefix.hash(&mut h);
        let mut rng = ChaCha8Rng::seed_from_u64(self.draw ^ h.finish());
        let mut boosted = base;
        for i in sample(&mut rng, legal.len(), count) {
            boosted.add(legal[i], self.boost);
        }
        Ok(boosted.normalized())
    }
}
