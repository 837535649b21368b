//! Token encodings of instruction steps and program states.

mod instruction;
pub mod state;
mod vocab;

pub use instruction::{
    decode_instruction, encode_instruction, is_valid_prefix, legal_next_tokens, CodecError, ParseError,
};
pub use state::{decode_state, encode_state, fingerprint, DecodedState, StateDecodeError, STATE_VOCAB_SIZE};
pub use vocab::{ManifestError, Token, TokenId, Vocabulary};
