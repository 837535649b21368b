//! The training and out-of-distribution task suites, instance sampling,
//! dataset emission, and ARC JSON I/O.

mod arc;
mod dataset;
mod programs;
mod sampler;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use arc::{load_arc_task, parse_arc_task, write_arc_task, FormatError};
pub use dataset::{emit_dataset, write_dataset, TrainingSample};
pub use programs::{compose, compose_with, Op, GREEN};
pub use sampler::{random_grid, sample_instance, sample_instance_with, SamplerError, SamplerParams};

use crate::dsl::Program;
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TaskId {
    Train(u8),
    Ood(u8),
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaskId::Train(n) => write!(f, "Train{n}"),
            TaskId::Ood(n) => write!(f, "OOD{n}"),
        }
    }
}

impl FromStr for TaskId {
    type Err = String;

    fn from_str(s: &str) -> Result<TaskId, String> {
        let lower = s.to_ascii_lowercase();
        let (ctor, rest, max): (fn(u8) -> TaskId, &str, u8) = if let Some(r) = lower.strip_prefix("train") {
            (TaskId::Train, r, 14)
        } else if let Some(r) = lower.strip_prefix("ood") {
            (TaskId::Ood, r, 7)
        } else {
            return Err(format!("unknown task `{s}`"));
        };
        match rest.parse::<u8>() {
            Ok(n) if (1..=max).contains(&n) => Ok(ctor(n)),
            _ => Err(format!("unknown task `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    pub id: TaskId,
    pub description: &'static str,
    pub ops: Vec<Op>,
    pub ground_truth: Program,
}

impl TaskSpec {
    fn new(id: TaskId, description: &'static str, ops: &[Op]) -> TaskSpec {
        TaskSpec { id, description, ops: ops.to_vec(), ground_truth: compose(ops) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskInstance {
    pub demos: Vec<(Grid, Grid)>,
    pub test: Vec<(Grid, Grid)>,
}

impl TaskInstance {
    pub fn demo_inputs(&self) -> Vec<Grid> {
        self.demos.iter().map(|(i, _)| i.clone()).collect()
    }

    pub fn demo_targets(&self) -> Vec<Grid> {
        self.demos.iter().map(|(_, o)| o.clone()).collect()
    }
}

pub fn training_suite() -> Vec<TaskSpec> {
    use Op::*;
    use TaskId::Train;
    vec![
        TaskSpec::new(Train(1), "mirror left to right", &[FlipH]),
        TaskSpec::new(Train(2), "mirror top to bottom", &[FlipV]),
        TaskSpec::new(Train(3), "paint foreground green", &[Green]),
        TaskSpec::new(Train(4), "mirror left to right, paint foreground green", &[FlipH, Green]),
        TaskSpec::new(Train(5), "mirror top to bottom, paint foreground green", &[FlipV, Green]),
        TaskSpec::new(Train(6), "move right one column", &[ShiftRight]),
        TaskSpec::new(Train(7), "move up one row", &[ShiftUp]),
        TaskSpec::new(Train(8), "move down one row", &[ShiftDown]),
        TaskSpec::new(Train(9), "move right, then mirror left to right", &[ShiftRight, FlipH]),
        TaskSpec::new(Train(10), "mirror top to bottom, then move right", &[FlipV, ShiftRight]),
        TaskSpec::new(Train(11), "mirror left to right, then move up", &[FlipH, ShiftUp]),
        TaskSpec::new(Train(12), "move down, then mirror left to right", &[ShiftDown, FlipH]),
        TaskSpec::new(Train(13), "move up, then mirror top to bottom", &[ShiftUp, FlipV]),
        TaskSpec::new(Train(14), "mirror top to bottom, then move up", &[FlipV, ShiftUp]),
    ]
}

pub fn ood_suite() -> Vec<TaskSpec> {
    use Op::*;
    use TaskId::Ood;
    vec![
        TaskSpec::new(Ood(1), "move right, paint foreground green", &[ShiftRight, Green]),
        TaskSpec::new(Ood(2), "mirror left to right, then move right", &[FlipH, ShiftRight]),
        TaskSpec::new(Ood(3), "move one cell toward the top-right corner", &[ShiftUp, ShiftRight]),
        TaskSpec::new(Ood(4), "half turn", &[FlipV, FlipH]),
        TaskSpec::new(Ood(5), "mirror left to right, move right, mirror top to bottom", &[FlipH, ShiftRight, FlipV]),
        TaskSpec::new(Ood(6), "paint foreground green, move toward the top-right corner", &[Green, ShiftUp, ShiftRight]),
        TaskSpec::new(Ood(7), "move left one column", &[ShiftLeft]),
    ]
}

pub fn all_tasks() -> Vec<TaskSpec> {
    let mut all = training_suite();
    all.extend(ood_suite());
    all
}

pub fn task(id: TaskId) -> TaskSpec {
    all_tasks().into_iter().find(|t| t.id == id).expect("every TaskId has a spec")
}

/// `(name, ground truth)` pairs in the shape the oracle consumes.
pub fn oracle_suite(specs: &[TaskSpec]) -> Vec<(String, Program)> {
    specs.iter().map(|s| (s.id.to_string(), s.ground_truth.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_parse_and_print() {
        for spec in all_tasks() {
            assert_eq!(spec.id.to_string().parse::<TaskId>(), Ok(spec.id));
        }
        assert_eq!("ood4".parse::<TaskId>(), Ok(TaskId::Ood(4)));
        assert!("ood8".parse::<TaskId>().is_err());
        assert!("train0".parse::<TaskId>().is_err());
        assert_eq!(all_tasks().len(), 21);
    }

    #[test]
    fn ood_programs_are_the_longest() {
        let train_max = training_suite().iter().map(|t| t.ground_truth.len()).max().unwrap();
        let ood_max = ood_suite().iter().map(|t| t.ground_truth.len()).max().unwrap();
        assert!(ood_max > train_max);
        assert!(ood_max <= crate::search::DEFAULT_MAX_DEPTH);
    }
}
