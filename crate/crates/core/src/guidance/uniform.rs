use super::{Distribution, GuidanceContext, GuidanceError, GuidanceModel};
use crate::token_codec::{legal_next_tokens, Vocabulary};

/// Equal probability on every grammar-legal next token.
#[derive(Debug, Clone)]
pub struct Uniform {
    vocab: Vocabulary,
}

impl Uniform {
    pub fn new(vocab: Vocabulary) -> Self {
        Uniform { vocab }
    }
}

/// Uniform distribution over the legal continuations of `ctx.prefix`.
pub(crate) fn uniform_over_legal(vocab: &Vocabulary, ctx: &GuidanceContext<'_>) -> Distribution {
    match legal_next_tokens(ctx.prefix, vocab, ctx.state.n_slots) {
        Ok(tokens) if !tokens.is_empty() => Distribution::uniform(&tokens),
        _ => Distribution::new(),
    }
}

impl GuidanceModel for Uniform {
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn next_token_dist(&self, ctx: &GuidanceContext<'_>) -> Result<Distribution, GuidanceError> {
        Ok(uniform_over_legal(&self.vocab, ctx))
    }
}
