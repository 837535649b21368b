//! Removing `del` steps by rewriting the references that follow them.

use super::{Arg, DslError, InstructionStep, Program};

/// Returns an equivalent program without `del` steps.
///
/// In the result, slot `k` is always the output of the `k`-th non-del step
/// (slot 0 being the inputs), so it may need more reference slots than the
/// original.
pub fn eliminate_dels(program: &Program) -> Result<Program, DslError> {
    // live[i] = index in the del-free program of the slot currently numbered i
    let mut live: Vec<usize> = vec![0];
    let mut next_index = 1;
    let mut steps = Vec::with_capacity(program.len());
    for step in &program.steps {
        let map = |i: usize| live.get(i).copied().ok_or(DslError::BadRef { index: i, len: live.len() });
        if step.is_del() {
            match step.args.first() {
                Some(Arg::Ref(i)) => {
                    map(*i)?;
                    live.remove(*i);
                }
                _ => {
                    return Err(DslError::TypeMismatch {
                        primitive: step.primitive,
                        detail: "del takes a plain reference".into(),
                    })
                }
            }
            continue;
        }
        let args = step
            .args
            .iter()
            .map(|a| {
                Ok(match *a {
                    Arg::Const(k) => Arg::Const(k),
                    Arg::Ref(i) => Arg::Ref(map(i)?),
                    Arg::RefAttr(i, attr) => Arg::RefAttr(map(i)?, attr),
                })
            })
            .collect::<Result<Vec<_>, DslError>>()?;
        steps.push(InstructionStep::new(step.primitive, args));
        live.push(next_index);
        next_index += 1;
    }
    Ok(Program::new(steps))
}
