//! Instruction vocabulary layout and its manifest file.
//!
//! IDs are dense: integer constants 0..=9, then one token per catalog
//! primitive, the nine attribute tokens, the three control tokens, and
//! finally `max_refs` state-reference tokens starting at `ref_base`.

use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use super::state::STATE_VOCAB_SIZE;
use crate::dsl::{Primitive, DEFAULT_MAX_REFS};
use crate::grid::Attribute;

pub type TokenId = u32;

const MANIFEST_MAGIC: &str = "gridsynth-vocabulary";
const MANIFEST_VERSION: u32 = 1;

/// A decoded instruction token.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Token {
    Int(u8),
    Prim(Primitive),
    Attr(Attribute),
    Sep,
    ArgSep,
    Eos,
    Ref(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    primitives: Vec<Primitive>,
    max_refs: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("manifest line {line}: {message}")]
pub struct ManifestError {
    pub line: usize,
    pub message: String,
}

impl Vocabulary {
    /// Vocabulary over `primitives` (in catalog order) with `max_refs` references.
    pub fn new(primitives: Vec<Primitive>, max_refs: usize) -> Self {
        assert!(max_refs >= 1, "need at least one reference token");
        let mut seen = primitives.clone();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), primitives.len(), "duplicate primitive in catalog");
        Vocabulary { primitives, max_refs }
    }

    /// The full catalog with the default reference budget.
    pub fn standard() -> Self {
        Vocabulary::new(Primitive::ALL.to_vec(), DEFAULT_MAX_REFS)
    }

    pub fn primitives(&self) -> &[Primitive] {
        &self.primitives
    }

    pub fn max_refs(&self) -> usize {
        self.max_refs
    }

    fn attr_base(&self) -> TokenId {
        10 + self.primitives.len() as TokenId
    }

    fn control_base(&self) -> TokenId {
        self.attr_base() + Attribute::ALL.len() as TokenId
    }

    pub fn sep(&self) -> TokenId {
        self.control_base()
    }

    pub fn argsep(&self) -> TokenId {
        self.control_base() + 1
    }

    pub fn eos(&self) -> TokenId {
        self.control_base() + 2
    }

    /// First state-reference token (reference `N+0`).
    pub fn ref_base(&self) -> TokenId {
        self.control_base() + 3
    }

    pub fn size(&self) -> usize {
        self.ref_base() as usize + self.max_refs
    }

    pub fn int(&self, k: u8) -> TokenId {
        assert!(k <= 9);
        k as TokenId
    }

    pub fn primitive(&self, p: Primitive) -> Option<TokenId> {
        self.primitives.iter().position(|&q| q == p).map(|i| 10 + i as TokenId)
    }

    pub fn attribute(&self, a: Attribute) -> TokenId {
        let i = Attribute::ALL.iter().position(|&b| b == a).expect("known attribute");
        self.attr_base() + i as TokenId
    }

    pub fn reference(&self, index: usize) -> Option<TokenId> {
        (index < self.max_refs).then(|| self.ref_base() + index as TokenId)
    }

    pub fn primitive_tokens(&self) -> impl Iterator<Item = TokenId> + '_ {
        (0..self.primitives.len()).map(|i| 10 + i as TokenId)
    }

    pub fn classify(&self, id: TokenId) -> Option<Token> {
        let p = self.primitives.len() as TokenId;
        match id {
            0..=9 => Some(Token::Int(id as u8)),
            _ if id < 10 + p => Some(Token::Prim(self.primitives[(id - 10) as usize])),
            _ if id < self.control_base() => {
                Some(Token::Attr(Attribute::ALL[(id - self.attr_base()) as usize]))
            }
            _ if id == self.sep() => Some(Token::Sep),
            _ if id == self.argsep() => Some(Token::ArgSep),
            _ if id == self.eos() => Some(Token::Eos),
            _ if (id as usize) < self.size() => Some(Token::Ref((id - self.ref_base()) as usize)),
            _ => None,
        }
    }

    /// Human-readable token name, used in traces and error messages.
    pub fn token_name(&self, id: TokenId) -> String {
        match self.classify(id) {
            Some(Token::Int(k)) => k.to_string(),
            Some(Token::Prim(p)) => p.name().to_string(),
            Some(Token::Attr(a)) => format!(".{a}"),
            Some(Token::Sep) => "<SEP>".into(),
            Some(Token::ArgSep) => "<ARGSEP>".into(),
            Some(Token::Eos) => "<EOS>".into(),
            Some(Token::Ref(i)) => format!("N+{i}"),
            None => format!("<?{id}>"),
        }
    }

    /// Versioned text manifest shared with external guidance servers.
    pub fn to_manifest(&self) -> String {
        let mut out = String::new();
        let names = |it: &mut dyn Iterator<Item = &'static str>| it.collect::<Vec<_>>().join(" ");
        writeln!(out, "{MANIFEST_MAGIC} {MANIFEST_VERSION}").unwrap();
        writeln!(out, "primitives {}", names(&mut self.primitives.iter().map(|p| p.name()))).unwrap();
        writeln!(out, "attributes {}", names(&mut Attribute::ALL.iter().map(|a| a.name()))).unwrap();
        writeln!(out, "controls SEP ARGSEP EOS").unwrap();
        writeln!(out, "ref_base {}", self.ref_base()).unwrap();
        writeln!(out, "max_refs {}", self.max_refs).unwrap();
        writeln!(out, "size {}", self.size()).unwrap();
        writeln!(out, "state_size {STATE_VOCAB_SIZE}").unwrap();
        out
    }

    /// Hex SHA-256 of the manifest text.
    pub fn manifest_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_manifest().as_bytes()))
    }

    pub fn from_manifest(text: &str) -> Result<Vocabulary, ManifestError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let mut field = |key: &str| -> Result<(usize, String), ManifestError> {
            let (i, line) = lines
                .next()
                .ok_or(ManifestError { line: 0, message: format!("missing `{key}` line") })?;
            let rest = line.strip_prefix(key).and_then(|r| r.strip_prefix(' ')).ok_or(ManifestError {
                line: i + 1,
                message: format!("expected `{key}`"),
            })?;
            Ok((i + 1, rest.trim().to_string()))
        };
        let err = |line: usize, message: String| ManifestError { line, message };

        let (l, version) = field(MANIFEST_MAGIC)?;
        if version != MANIFEST_VERSION.to_string() {
            return Err(err(l, format!("unsupported version {version}")));
        }
        let (l, prims) = field("primitives")?;
        let primitives = prims
            .split_whitespace()
            .map(|n| Primitive::from_name(n).ok_or_else(|| err(l, format!("unknown primitive `{n}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        let (l, attrs) = field("attributes")?;
        let expected_attrs: Vec<&str> = Attribute::ALL.iter().map(|a| a.name()).collect();
        if attrs.split_whitespace().collect::<Vec<_>>() != expected_attrs {
            return Err(err(l, "attribute list does not match".into()));
        }
        let (l, controls) = field("controls")?;
        if controls != "SEP ARGSEP EOS" {
            return Err(err(l, "control token list does not match".into()));
        }
        let num = |(l, v): (usize, String)| v.parse::<usize>().map_err(|_| err(l, format!("bad number `{v}`")));
        let ref_base = field("ref_base").and_then(num)?;
        let (l, max_refs_text) = field("max_refs")?;
        let max_refs = num((l, max_refs_text))?;
        if max_refs == 0 {
            return Err(err(l, "max_refs must be positive".into()));
        }
        let size = field("size").and_then(num)?;
        let state_size = field("state_size").and_then(num)?;

        let mut dedup = primitives.clone();
        dedup.sort();
        dedup.dedup();
        if dedup.len() != primitives.len() {
            return Err(err(0, "duplicate primitive".into()));
        }
        let vocab = Vocabulary::new(primitives, max_refs);
        if vocab.ref_base() as usize != ref_base || vocab.size() != size || state_size != STATE_VOCAB_SIZE {
            return Err(err(0, "layout numbers disagree with the token lists".into()));
        }
        Ok(vocab)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_dense_and_ordered() {
        let v = Vocabulary::standard();
        let mut classes = Vec::new();
        for id in 0..v.size() as TokenId {
            classes.push(v.classify(id).expect("dense"));
        }
        assert!(v.classify(v.size() as TokenId).is_none());
        // integers, then primitives and attributes, then references
        let rank = |t: &Token| match t {
            Token::Int(_) => 0,
            Token::Prim(_) => 1,
            Token::Attr(_) => 2,
            Token::Sep | Token::ArgSep | Token::Eos => 3,
            Token::Ref(_) => 4,
        };
        assert!(classes.windows(2).all(|w| rank(&w[0]) <= rank(&w[1])));
        assert_eq!(v.primitive(Primitive::Identity), Some(10));
        assert_eq!(v.reference(0), Some(v.ref_base()));
        assert_eq!(v.reference(10), None);
    }

    #[test]
    fn manifest_round_trip() {
        let v = Vocabulary::new(vec![Primitive::Equal, Primitive::Switch, Primitive::Del], 4);
        let text = v.to_manifest();
        assert_eq!(Vocabulary::from_manifest(&text).unwrap(), v);
        assert_ne!(v.manifest_hash(), Vocabulary::standard().manifest_hash());
        let broken = text.replace("max_refs 4", "max_refs 5");
        assert!(Vocabulary::from_manifest(&broken).is_err());
    }
}
