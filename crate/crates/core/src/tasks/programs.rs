use crate::dsl::{Arg, InstructionStep, Primitive, Program, DEFAULT_MAX_REFS};
use crate::grid::Attribute;

/// Color used by every recoloring task.
pub const GREEN: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Handle(usize);

#[derive(Debug, Clone, Copy)]
enum A {
    K(u8),
    H(Handle),
    At(Handle, Attribute),
}

/// Emits straight-line code over symbolic handles, tracking where each live
/// value sits after `del` renumbering.
struct Builder {
    live: Vec<Handle>,
    next: usize,
    steps: Vec<InstructionStep>,
    max_refs: usize,
}

impl Builder {
    fn new(max_refs: usize) -> (Builder, Handle) {
        let b = Builder { live: vec![Handle(0)], next: 1, steps: Vec::new(), max_refs };
        (b, Handle(0))
    }

    fn pos(&self, h: Handle) -> usize {
        self.live.iter().position(|&l| l == h).expect("handle is live")
    }

    fn emit(&mut self, primitive: Primitive, args: &[A]) -> Handle {
        let args = args
            .iter()
            .map(|a| match *a {
                A::K(k) => Arg::Const(k),
                A::H(h) => Arg::Ref(self.pos(h)),
                A::At(h, attr) => Arg::RefAttr(self.pos(h), attr),
            })
            .collect();
        self.steps.push(InstructionStep::new(primitive, args));
        let h = Handle(self.next);
        self.next += 1;
        self.live.push(h);
        h
    }

    fn del(&mut self, h: Handle) {
        let p = self.pos(h);
        self.steps.push(InstructionStep::new(Primitive::Del, vec![Arg::Ref(p)]));
        self.live.remove(p);
    }

    /// Frees slots until `need` new values fit, deleting everything but `keep`
    /// (newest first).
    fn reserve(&mut self, need: usize, keep: Handle) {
        while self.live.len() + need > self.max_refs {
            let victim = *self.live.iter().rev().find(|&&h| h != keep).expect("a dead slot to free");
            self.del(victim);
        }
    }

    fn finish(self) -> Program {
        Program::new(self.steps)
    }
}

/// One of the atomic grid operations the tasks are composed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    FlipH,
    FlipV,
    Green,
    ShiftRight,
    ShiftLeft,
    ShiftUp,
    ShiftDown,
}

impl Op {
    /// New slots the op allocates at its peak.
    fn slots(self) -> usize {
        match self {
            Op::FlipH | Op::FlipV => 3,
            Op::Green => 2,
            Op::ShiftRight | Op::ShiftLeft | Op::ShiftUp | Op::ShiftDown => 4,
        }
    }

    fn emit(self, b: &mut Builder, g: Handle) -> Handle {
        use Attribute::*;
        use Primitive::*;
        match self {
            Op::FlipH => {
                let c = b.emit(ColorOf, &[A::H(g)]);
                let x = b.emit(Sub, &[A::At(g, MaxX), A::At(g, X)]);
                b.emit(SetPixels, &[A::H(g), A::H(x), A::At(g, Y), A::H(c)])
            }
            Op::FlipV => {
                let c = b.emit(ColorOf, &[A::H(g)]);
                let y = b.emit(Sub, &[A::At(g, MaxY), A::At(g, Y)]);
                b.emit(SetPixels, &[A::H(g), A::At(g, X), A::H(y), A::H(c)])
            }
            Op::Green => {
                let bg = b.emit(Equal, &[A::At(g, C), A::K(0)]);
                let c = b.emit(Switch, &[A::H(bg), A::K(0), A::K(GREEN)]);
                b.del(bg);
                b.emit(SetPixels, &[A::H(g), A::At(g, X), A::At(g, Y), A::H(c)])
            }
            Op::ShiftRight => {
                let x = b.emit(Add, &[A::At(g, X), A::K(1)]);
                let moved = b.emit(SetPixels, &[A::H(g), A::H(x), A::At(g, Y), A::At(g, C)]);
                let cut = b.emit(Crop, &[A::H(moved), A::At(g, Width), A::At(g, Height)]);
                b.emit(SetPixels, &[A::H(cut), A::K(0), A::At(cut, Y), A::K(0)])
            }
            Op::ShiftDown => {
                let y = b.emit(Add, &[A::At(g, Y), A::K(1)]);
                let moved = b.emit(SetPixels, &[A::H(g), A::At(g, X), A::H(y), A::At(g, C)]);
                let cut = b.emit(Crop, &[A::H(moved), A::At(g, Width), A::At(g, Height)]);
                b.emit(SetPixels, &[A::H(cut), A::At(cut, X), A::K(0), A::K(0)])
            }
            // The crop is a no-op here: nothing is written past the border.
            Op::ShiftLeft => {
                let x = b.emit(Sub, &[A::At(g, X), A::K(1)]);
                let moved = b.emit(SetPixels, &[A::H(g), A::H(x), A::At(g, Y), A::At(g, C)]);
                let cut = b.emit(Crop, &[A::H(moved), A::At(g, Width), A::At(g, Height)]);
                b.emit(SetPixels, &[A::H(cut), A::At(cut, MaxX), A::At(cut, Y), A::K(0)])
            }
            Op::ShiftUp => {
                let y = b.emit(Sub, &[A::At(g, Y), A::K(1)]);
                let moved = b.emit(SetPixels, &[A::H(g), A::At(g, X), A::H(y), A::At(g, C)]);
                let cut = b.emit(Crop, &[A::H(moved), A::At(g, Width), A::At(g, Height)]);
                b.emit(SetPixels, &[A::H(cut), A::At(cut, X), A::At(cut, MaxY), A::K(0)])
            }
        }
    }
}

/// Chains the ops left to right, inserting `del`s only when the next op
/// would overflow `max_refs` slots.
pub fn compose_with(ops: &[Op], max_refs: usize) -> Program {
    let (mut b, mut g) = Builder::new(max_refs);
    for &op in ops {
        b.reserve(op.slots(), g);
        g = op.emit(&mut b, g);
    }
    b.finish()
}

pub fn compose(ops: &[Op]) -> Program {
    compose_with(ops, DEFAULT_MAX_REFS)
}
