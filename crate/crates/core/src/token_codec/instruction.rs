//! Instruction grammar: `primitive SEP arg (ARGSEP arg)* EOS`, where an arg is
//! a constant, a reference, or a reference followed by an attribute token.
//!
//! The grammar is arity-aware (EOS only after exactly `arity` args) and `del`
//! accepts a single plain reference.

use super::vocab::{Token, TokenId, Vocabulary};
use crate::dsl::{Arg, InstructionStep, Primitive};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodecError {
    #[error("reference N{index} exceeds the budget of {max_refs} reference tokens")]
    RefOverflow { index: usize, max_refs: usize },
    #[error("primitive {0} is not in the vocabulary")]
    UnknownPrimitive(Primitive),
    #[error("{primitive} takes {expected} arguments, got {got}")]
    Arity { primitive: Primitive, expected: usize, got: usize },
    #[error("del takes a plain reference")]
    DelArgument,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at token {pos}: {reason}")]
pub struct ParseError {
    pub pos: usize,
    pub reason: String,
}

pub fn encode_instruction(step: &InstructionStep, vocab: &Vocabulary) -> Result<Vec<TokenId>, CodecError> {
    let prim = vocab.primitive(step.primitive).ok_or(CodecError::UnknownPrimitive(step.primitive))?;
    if step.args.len() != step.primitive.arity() {
        return Err(CodecError::Arity {
            primitive: step.primitive,
            expected: step.primitive.arity(),
            got: step.args.len(),
        });
    }
    let reference = |i: usize| vocab.reference(i).ok_or(CodecError::RefOverflow { index: i, max_refs: vocab.max_refs() });
    let mut out = vec![prim, vocab.sep()];
    for (n, arg) in step.args.iter().enumerate() {
        if n > 0 {
            out.push(vocab.argsep());
        }
        match *arg {
            Arg::Const(k) if step.primitive != Primitive::Del => out.push(vocab.int(k)),
            Arg::Ref(i) => out.push(reference(i)?),
            Arg::RefAttr(i, a) if step.primitive != Primitive::Del => {
                out.push(reference(i)?);
                out.push(vocab.attribute(a));
            }
            _ => return Err(CodecError::DelArgument),
        }
    }
    out.push(vocab.eos());
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Start,
    AfterPrim,
    ArgStart,
    AfterConst,
    AfterRef,
    AfterAttr,
    Done,
}

/// Parser state after consuming a token prefix.
#[derive(Debug, Clone)]
struct Scan {
    primitive: Option<Primitive>,
    args: Vec<Arg>,
    phase: Phase,
}

fn scan(vocab: &Vocabulary, tokens: &[TokenId]) -> Result<Scan, ParseError> {
    let mut s = Scan { primitive: None, args: Vec::new(), phase: Phase::Start };
    for (pos, &id) in tokens.iter().enumerate() {
        let fail = |reason: &str| ParseError { pos, reason: reason.to_string() };
        let token = vocab.classify(id).ok_or_else(|| fail("unknown token id"))?;
        let is_del = s.primitive == Some(Primitive::Del);
        let arity = s.primitive.map_or(0, |p| p.arity());
        s.phase = match (s.phase, token) {
            (Phase::Start, Token::Prim(p)) => {
                s.primitive = Some(p);
                Phase::AfterPrim
            }
            (Phase::Start, _) => return Err(fail("expected a primitive")),
            (Phase::AfterPrim, Token::Sep) => Phase::ArgStart,
            (Phase::AfterPrim, _) => return Err(fail("expected <SEP>")),
            (Phase::ArgStart, Token::Int(k)) if !is_del => {
                s.args.push(Arg::Const(k));
                Phase::AfterConst
            }
            (Phase::ArgStart, Token::Ref(i)) => {
                s.args.push(Arg::Ref(i));
                Phase::AfterRef
            }
            (Phase::ArgStart, Token::Attr(_)) => return Err(fail("attribute without a reference")),
            (Phase::ArgStart, _) => return Err(fail("expected an argument")),
            (Phase::AfterRef, Token::Attr(a)) if !is_del => {
                let Some(Arg::Ref(i)) = s.args.pop() else { unreachable!("AfterRef follows a Ref") };
                s.args.push(Arg::RefAttr(i, a));
                Phase::AfterAttr
            }
            (Phase::AfterConst | Phase::AfterRef | Phase::AfterAttr, Token::ArgSep) => {
                if s.args.len() >= arity {
                    return Err(fail("too many arguments"));
                }
                Phase::ArgStart
            }
            (Phase::AfterConst | Phase::AfterRef | Phase::AfterAttr, Token::Eos) => {
                if s.args.len() != arity {
                    return Err(fail("too few arguments"));
                }
                Phase::Done
            }
            (Phase::AfterConst | Phase::AfterRef | Phase::AfterAttr, _) => {
                return Err(fail("expected <ARGSEP> or <EOS>"))
            }
            (Phase::Done, _) => return Err(fail("tokens after <EOS>")),
        };
    }
    Ok(s)
}

pub fn decode_instruction(tokens: &[TokenId], vocab: &Vocabulary) -> Result<InstructionStep, ParseError> {
    let s = scan(vocab, tokens)?;
    if s.phase != Phase::Done {
        return Err(ParseError { pos: tokens.len(), reason: "missing <EOS>".into() });
    }
    Ok(InstructionStep::new(s.primitive.expect("done implies a primitive"), s.args))
}

/// True if `prefix` can be extended to a valid instruction.
pub fn is_valid_prefix(prefix: &[TokenId], vocab: &Vocabulary) -> bool {
    scan(vocab, prefix).is_ok()
}

/// Tokens that may follow `prefix` in a state with `n_slots` live slots.
///
/// Returns an empty list for a complete instruction and an error for an
/// invalid prefix.
pub fn legal_next_tokens(prefix: &[TokenId], vocab: &Vocabulary, n_slots: usize) -> Result<Vec<TokenId>, ParseError> {
    let s = scan(vocab, prefix)?;
    let refs = || (0..n_slots.min(vocab.max_refs())).filter_map(|i| vocab.reference(i));
    let is_del = s.primitive == Some(Primitive::Del);
    let arity = s.primitive.map_or(0, |p| p.arity());
    let close = |out: &mut Vec<TokenId>| {
        if s.args.len() < arity {
            out.push(vocab.argsep());
        } else {
            out.push(vocab.eos());
        }
    };
    let mut out = Vec::new();
    match s.phase {
        Phase::Start => out.extend(vocab.primitive_tokens()),
        Phase::AfterPrim => out.push(vocab.sep()),
        Phase::ArgStart => {
            if !is_del {
                out.extend((0..=9).map(|k| vocab.int(k)));
            }
            out.extend(refs());
        }
        Phase::AfterRef => {
            if !is_del {
                out.extend(crate::grid::Attribute::ALL.iter().map(|&a| vocab.attribute(a)));
            }
            close(&mut out);
        }
        Phase::AfterConst | Phase::AfterAttr => close(&mut out),
        Phase::Done => {}
    }
    out.sort_unstable();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Attribute;

    fn v() -> Vocabulary {
        Vocabulary::standard()
    }

    #[test]
    fn table_three_rows() {
        let v = v();
        let eq: InstructionStep = "equal(N0.c, 0)".parse().unwrap();
        let expected = vec![
            v.primitive(Primitive::Equal).unwrap(),
            v.sep(),
            v.reference(0).unwrap(),
            v.attribute(Attribute::C),
            v.argsep(),
            0,
            v.eos(),
        ];
        assert_eq!(encode_instruction(&eq, &v).unwrap(), expected);

        let del: InstructionStep = "del(N1)".parse().unwrap();
        let expected = vec![v.primitive(Primitive::Del).unwrap(), v.sep(), v.reference(1).unwrap(), v.eos()];
        assert_eq!(encode_instruction(&del, &v).unwrap(), expected);

        let sw = vec![
            v.primitive(Primitive::Switch).unwrap(),
            v.sep(),
            v.reference(1).unwrap(),
            v.argsep(),
            0,
            v.argsep(),
            2,
            v.eos(),
        ];
        assert_eq!(decode_instruction(&sw, &v).unwrap().to_string(), "switch(N1, 0, 2)");
    }

    #[test]
    fn decode_errors() {
        let v = v();
        assert_eq!(decode_instruction(&[v.sep()], &v).unwrap_err().pos, 0);
        let attr_first = [v.primitive(Primitive::Equal).unwrap(), v.sep(), v.attribute(Attribute::C), v.eos()];
        assert_eq!(decode_instruction(&attr_first, &v).unwrap_err().pos, 2);
        let no_eos = [v.primitive(Primitive::Identity).unwrap(), v.sep(), v.reference(0).unwrap()];
        assert_eq!(decode_instruction(&no_eos, &v).unwrap_err().pos, 3);
        let dangling = [v.primitive(Primitive::Identity).unwrap(), v.sep(), 3, v.argsep()];
        assert!(decode_instruction(&dangling, &v).is_err());
        assert!(decode_instruction(&[v.size() as TokenId], &v).is_err());
    }

    #[test]
    fn ref_overflow() {
        let v = Vocabulary::new(vec![Primitive::Identity], 2);
        let step: InstructionStep = "identity(N2)".parse().unwrap();
        assert_eq!(
            encode_instruction(&step, &v).unwrap_err(),
            CodecError::RefOverflow { index: 2, max_refs: 2 }
        );
    }

    #[test]
    fn legal_tokens_follow_grammar() {
        let v = v();
        let del = v.primitive(Primitive::Del).unwrap();
        assert_eq!(legal_next_tokens(&[del, v.sep()], &v, 2).unwrap(), vec![v.ref_base(), v.ref_base() + 1]);
        assert_eq!(legal_next_tokens(&[del, v.sep(), v.ref_base()], &v, 2).unwrap(), vec![v.eos()]);
        let ident = v.primitive(Primitive::Identity).unwrap();
        let after_ref = legal_next_tokens(&[ident, v.sep(), v.ref_base()], &v, 1).unwrap();
        assert_eq!(after_ref.len(), 10);
        assert!(after_ref.contains(&v.eos()));
        assert!(!after_ref.contains(&v.argsep()));
        assert_eq!(legal_next_tokens(&[], &v, 1).unwrap().len(), v.primitives().len());
    }
}
