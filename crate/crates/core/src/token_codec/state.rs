//! Serialization of program states for guidance models.
//!
//! Per example, in order:
//!
//! ```text
//! <input grid> (SLOT <value>)* TARGET <target grid> END
//! ```
//!
//! A grid is `GRID h w` followed by `h` rows of `w` color tokens, each row
//! closed by `ROWSEP`. Scalars are `INT n` / `BOOL b`; lists are
//! `INTLIST n* LISTEND` / `BOOLLIST b* LISTEND`. Colors use tokens 0..=9;
//! every other integer uses the NUM block, which covers -128..=127 and
//! saturates to `NUM_OVERFLOW` outside that range.

use std::hash::{DefaultHasher, Hash, Hasher};

use super::vocab::TokenId;
use crate::dsl::{ProgramState, Value};
use crate::grid::Grid;

pub const GRID: TokenId = 10;
pub const ROWSEP: TokenId = 11;
pub const INT: TokenId = 12;
pub const BOOL: TokenId = 13;
pub const INTLIST: TokenId = 14;
pub const BOOLLIST: TokenId = 15;
pub const LISTEND: TokenId = 16;
pub const TRUE: TokenId = 17;
pub const FALSE: TokenId = 18;
pub const SLOT: TokenId = 19;
pub const TARGET: TokenId = 20;
pub const END: TokenId = 21;
pub const NUM_OVERFLOW: TokenId = 22;
pub const NUM_BASE: TokenId = 23;
pub const NUM_MIN: i64 = -128;
pub const NUM_MAX: i64 = 127;

pub const STATE_VOCAB_SIZE: usize = NUM_BASE as usize + (NUM_MAX - NUM_MIN + 1) as usize;

pub fn num(v: i64) -> TokenId {
    if (NUM_MIN..=NUM_MAX).contains(&v) {
        NUM_BASE + (v - NUM_MIN) as TokenId
    } else {
        NUM_OVERFLOW
    }
}

fn num_value(t: TokenId) -> Option<i64> {
    (NUM_BASE..NUM_BASE + (NUM_MAX - NUM_MIN + 1) as TokenId)
        .contains(&t)
        .then(|| (t - NUM_BASE) as i64 + NUM_MIN)
}

fn push_grid(out: &mut Vec<TokenId>, g: &Grid) {
    out.push(GRID);
    out.push(num(g.height() as i64));
    out.push(num(g.width() as i64));
    for row in g.rows() {
        out.extend(row.iter().map(|&c| c as TokenId));
        out.push(ROWSEP);
    }
}

fn push_value(out: &mut Vec<TokenId>, v: &Value) {
    match v {
        Value::Grid(g) => push_grid(out, g),
        Value::Int(n) => out.extend([INT, num(*n)]),
        Value::Bool(b) => out.extend([BOOL, if *b { TRUE } else { FALSE }]),
        Value::IntList(l) => {
            out.push(INTLIST);
            out.extend(l.iter().map(|&n| num(n)));
            out.push(LISTEND);
        }
        Value::BoolList(l) => {
            out.push(BOOLLIST);
            out.extend(l.iter().map(|&b| if b { TRUE } else { FALSE }));
            out.push(LISTEND);
        }
    }
}

/// Canonical token sequence for `state` paired with `targets`.
pub fn encode_state(state: &ProgramState, targets: &[Grid]) -> Vec<TokenId> {
    assert_eq!(state.num_examples(), targets.len(), "one target per example");
    let mut out = Vec::new();
    for (e, target) in targets.iter().enumerate() {
        push_grid(&mut out, &state.inputs()[e]);
        for slot in state.slots() {
            out.push(SLOT);
            push_value(&mut out, &slot[e]);
        }
        out.push(TARGET);
        push_grid(&mut out, target);
        out.push(END);
    }
    out
}

/// Stable 64-bit fingerprint of a serialized state.
pub fn fingerprint(tokens: &[TokenId]) -> u64 {
    let mut h = DefaultHasher::new();
    tokens.hash(&mut h);
    h.finish()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed state tokens at {pos}: {reason}")]
pub struct StateDecodeError {
    pub pos: usize,
    pub reason: &'static str,
}

/// What a guidance model can recover from a serialized state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodedState {
    pub inputs: Vec<Grid>,
    pub targets: Vec<Grid>,
    /// Number of live slots (identical across examples).
    pub n_slots: usize,
}

struct Reader<'a> {
    tokens: &'a [TokenId],
    pos: usize,
}

impl Reader<'_> {
    fn next(&mut self) -> Result<TokenId, StateDecodeError> {
        let t = *self.tokens.get(self.pos).ok_or(StateDecodeError { pos: self.pos, reason: "unexpected end" })?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, t: TokenId, reason: &'static str) -> Result<(), StateDecodeError> {
        let pos = self.pos;
        if self.next()? != t {
            return Err(StateDecodeError { pos, reason });
        }
        Ok(())
    }

    fn dim(&mut self) -> Result<usize, StateDecodeError> {
        let pos = self.pos;
        match num_value(self.next()?) {
            Some(v) if v >= 1 => Ok(v as usize),
            _ => Err(StateDecodeError { pos, reason: "bad grid dimension" }),
        }
    }

    fn grid(&mut self) -> Result<Grid, StateDecodeError> {
        let start = self.pos;
        self.expect(GRID, "expected GRID")?;
        let h = self.dim()?;
        let w = self.dim()?;
        let mut rows = Vec::with_capacity(h);
        for _ in 0..h {
            let mut row = Vec::with_capacity(w);
            for _ in 0..w {
                let pos = self.pos;
                let c = self.next()?;
                if c > 9 {
                    return Err(StateDecodeError { pos, reason: "expected a color" });
                }
                row.push(c as u8);
            }
            self.expect(ROWSEP, "expected ROWSEP")?;
            rows.push(row);
        }
        Grid::from_rows(&rows).map_err(|_| StateDecodeError { pos: start, reason: "invalid grid" })
    }

    fn skip_value(&mut self) -> Result<(), StateDecodeError> {
        let pos = self.pos;
        match self.tokens.get(pos) {
            Some(&GRID) => self.grid().map(|_| ()),
            Some(&INT) | Some(&BOOL) => {
                self.pos += 2;
                (self.pos <= self.tokens.len())
                    .then_some(())
                    .ok_or(StateDecodeError { pos, reason: "truncated scalar" })
            }
            Some(&INTLIST) | Some(&BOOLLIST) => {
                self.pos += 1;
                while self.next()? != LISTEND {}
                Ok(())
            }
            _ => Err(StateDecodeError { pos, reason: "expected a value" }),
        }
    }
}

/// Recovers the input/target grids and slot count from `encode_state` output.
pub fn decode_state(tokens: &[TokenId]) -> Result<DecodedState, StateDecodeError> {
    let mut r = Reader { tokens, pos: 0 };
    let mut out = DecodedState { inputs: Vec::new(), targets: Vec::new(), n_slots: 0 };
    while r.pos < tokens.len() {
        out.inputs.push(r.grid()?);
        let mut slots = 0;
        loop {
            let pos = r.pos;
            match r.next()? {
                SLOT => {
                    r.skip_value()?;
                    slots += 1;
                }
                TARGET => break,
                _ => return Err(StateDecodeError { pos, reason: "expected SLOT or TARGET" }),
            }
        }
        out.targets.push(r.grid()?);
        r.expect(END, "expected END")?;
        if out.inputs.len() > 1 && slots != out.n_slots {
            return Err(StateDecodeError { pos: r.pos, reason: "slot count differs between examples" });
        }
        out.n_slots = slots;
    }
    if out.inputs.is_empty() {
        return Err(StateDecodeError { pos: 0, reason: "no examples" });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(rows: &[&[u8]]) -> Grid {
        Grid::from_rows(rows).unwrap()
    }

    #[test]
    fn smallest_grid_layout() {
        let state = ProgramState::new(vec![grid(&[&[3]])]);
        let tokens = encode_state(&state, &[grid(&[&[4]])]);
        assert_eq!(&tokens[..5], &[GRID, num(1), num(1), 3, ROWSEP]);
        assert_eq!(
            tokens,
            vec![GRID, num(1), num(1), 3, ROWSEP, SLOT, GRID, num(1), num(1), 3, ROWSEP, TARGET, GRID, num(1), num(1), 4, ROWSEP, END]
        );
    }

    #[test]
    fn decode_recovers_grids() {
        let inputs = vec![grid(&[&[1, 2], &[3, 4]]), grid(&[&[0, 0, 5]])];
        let targets = vec![grid(&[&[9]]), grid(&[&[7, 7]])];
        let state = ProgramState::new(inputs.clone())
            .exec_step(&"equal(N0.c, 0)".parse().unwrap())
            .unwrap()
            .exec_step(&"mul(N0.width, 9)".parse().unwrap())
            .unwrap()
            .exec_step(&"mul(N2, 9)".parse().unwrap())
            .unwrap();
        let tokens = encode_state(&state, &targets);
        assert!(tokens.contains(&NUM_OVERFLOW));
        let d = decode_state(&tokens).unwrap();
        assert_eq!(d, DecodedState { inputs, targets, n_slots: 4 });
        assert!(decode_state(&tokens[..tokens.len() - 1]).is_err());
    }

    #[test]
    fn num_block_bounds() {
        assert_eq!(num(-128), NUM_BASE);
        assert_eq!(num(127) as usize, STATE_VOCAB_SIZE - 1);
        assert_eq!(num(128), NUM_OVERFLOW);
        assert_eq!(num_value(num(-5)), Some(-5));
    }
}
