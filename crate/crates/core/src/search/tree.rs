use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_task, entropy_restart, Budget, SearchConfig, SearchError, SearchOutcome, TraceEvent};
use crate::dsl::{InstructionStep, Program, ProgramState};
use crate::grid::Grid;
use crate::guidance::{enumerate_steps, GuidanceModel, StateContext};

#[derive(Debug, Clone)]
pub struct SearchNode {
    pub parent: Option<usize>,
    pub step: Option<InstructionStep>,
    pub depth: usize,
    pub log_prob: f64,
    /// Result of executing the path to this node. Dropped for leaves unless
    /// the tree is kept.
    pub state: Option<ProgramState>,
    pub dead: bool,
    pub children: Vec<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct SearchTree {
    pub nodes: Vec<SearchNode>,
}

impl SearchTree {
    /// The program spelled by the path from the root to `node`.
    pub fn path(&self, mut node: usize) -> Program {
        let mut steps = Vec::new();
        while let Some(step) = &self.nodes[node].step {
            steps.push(step.clone());
            node = self.nodes[node].parent.expect("non-root node has a parent");
        }
        steps.reverse();
        Program::new(steps)
    }
}

struct QueueEntry {
    log_prob: f64,
    seq: u64,
    parent: usize,
    step: InstructionStep,
}

impl PartialEq for QueueEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for QueueEntry {}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QueueEntry {
    // max-heap: highest joint log-prob first, then earliest insertion
    fn cmp(&self, other: &Self) -> Ordering {
        self.log_prob.total_cmp(&other.log_prob).then_with(|| other.seq.cmp(&self.seq))
    }
}

enum RunEnd {
    Solved,
    Exhausted,
    OutOfBudget,
}

/// One search iteration from a fresh root and an empty queue.
fn run_once<M: GuidanceModel + ?Sized>(
    inputs: &[Grid],
    targets: &[Grid],
    model: &M,
    cfg: &SearchConfig,
    budget: &mut Budget,
    out: &mut SearchOutcome,
) -> Result<RunEnd, SearchError> {
    let max_refs = model.vocab().max_refs();
    let mut tree = SearchTree::default();
    tree.nodes.push(SearchNode {
        parent: None,
        step: None,
        depth: 0,
        log_prob: 0.0,
        state: None,
        dead: false,
        children: Vec::new(),
    });
    let mut queue: BinaryHeap<QueueEntry> = BinaryHeap::new();
    let mut seq = 0u64;
    let mut selected = 0usize;

    let end = loop {
        if budget.spent() {
            break RunEnd::OutOfBudget;
        }
        budget.charge();
        out.nodes += 1;

        let node = &tree.nodes[selected];
        let executed = match (&node.step, node.parent) {
            (Some(step), Some(parent)) => {
                let parent_state = tree.nodes[parent].state.as_ref().expect("parent state cached while children are queued");
                parent_state.exec_step(step).ok()
            }
            _ => Some(ProgramState::with_max_refs(inputs.to_vec(), max_refs)),
        };

        let (depth, joint) = (node.depth, node.log_prob);
        match executed {
            None => tree.nodes[selected].dead = true,
            Some(state) => {
                if state.matches(targets) {
                    let program = tree.path(selected);
                    if cfg.trace {
                        out.trace.push(TraceEvent::Solution {
                            node: selected,
                            depth,
                            log_prob: joint,
                            program: program.to_string(),
                        });
                    }
                    out.solutions.push(program.clone());
                    if out.program.is_none() {
                        out.program = Some(program);
                    }
                    if !cfg.exhaustive {
                        tree.nodes[selected].state = Some(state);
                        break RunEnd::Solved;
                    }
                }
                let mut enqueued = 0;
                if depth < cfg.max_depth {
                    let ctx = StateContext::new(&state, targets, depth);
                    let found = enumerate_steps(model, &ctx, cfg.floor, cfg.candidate_cap)?;
                    if found.truncated {
                        out.truncated_expansions += 1;
                    }
                    for cand in found.candidates {
                        if depth == 0 {
                            out.root_candidates.insert(cand.tokens.clone());
                        }
                        queue.push(QueueEntry { log_prob: joint + cand.log_prob, seq, parent: selected, step: cand.step });
                        seq += 1;
                        enqueued += 1;
                    }
                }
                if enqueued > 0 || cfg.keep_tree {
                    tree.nodes[selected].state = Some(state);
                }
            }
        }

        let Some(next) = queue.pop() else { break RunEnd::Exhausted };
        let child = tree.nodes.len();
        let depth = tree.nodes[next.parent].depth + 1;
        tree.nodes.push(SearchNode {
            parent: Some(next.parent),
            step: Some(next.step),
            depth,
            log_prob: next.log_prob,
            state: None,
            dead: false,
            children: Vec::new(),
        });
        tree.nodes[next.parent].children.push(child);
        if cfg.trace {
            out.trace.push(TraceEvent::Dequeue { node: child, depth, log_prob: next.log_prob });
        }
        selected = child;
    };

    if cfg.keep_tree {
        out.trees.push(tree);
    }
    Ok(end)
}

/// Best-first search for a program mapping every input to its target.
///
/// Returns an outcome whose `program` is `None` when the budget runs out or
/// the queue is exhausted. With entropy enabled, an exhausted search is
/// re-launched with boosted root-token probabilities until it succeeds or
/// the budget is spent.
pub fn tree_search<M: GuidanceModel + ?Sized>(
    inputs: &[Grid],
    targets: &[Grid],
    model: &M,
    cfg: &SearchConfig,
) -> Result<SearchOutcome, SearchError> {
    check_task(inputs, targets)?;
    cfg.validate()?;
    let mut budget = Budget::new(cfg);
    let mut out = SearchOutcome::default();
    let mut end = run_once(inputs, targets, model, cfg, &mut budget, &mut out)?;

    if cfg.entropy && !cfg.exhaustive {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        while matches!(end, RunEnd::Exhausted) && !budget.spent() {
            out.restarts += 1;
            if cfg.trace {
                out.trace.push(TraceEvent::Restart { iteration: out.restarts, nodes: out.nodes });
            }
            let boosted = entropy_restart(model, cfg, &mut rng);
            end = run_once(inputs, targets, &boosted, cfg, &mut budget, &mut out)?;
        }
    }
    out.exhausted = matches!(end, RunEnd::Exhausted);
    out.elapsed = budget.elapsed();
    Ok(out)
}
