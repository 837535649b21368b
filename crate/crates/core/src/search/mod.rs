//! Best-first search over partial programs, the greedy rollout baseline, and
//! the entropy restart.

mod entropy;
mod greedy;
mod tree;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use serde::Serialize;

pub use entropy::{entropy_restart, EntropyBoost};
pub use greedy::greedy_rollout;
pub use tree::{tree_search, SearchNode, SearchTree};

use crate::dsl::Program;
use crate::guidance::{GuidanceError, StepCandidate, DEFAULT_CANDIDATE_CAP, DEFAULT_FLOOR};
use crate::token_codec::TokenId;

pub const DEFAULT_MAX_DEPTH: usize = 16;
pub const DEFAULT_ENTROPY_BOOST: f64 = 0.05;
pub const DEFAULT_ENTROPY_TOKEN_FRACTION: f64 = 0.15;

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    /// Wall-clock budget.
    pub budget: Duration,
    /// Optional cap on executed nodes, for deterministic runs.
    pub node_budget: Option<usize>,
    pub max_depth: usize,
    pub floor: f64,
    pub candidate_cap: usize,
    pub entropy: bool,
    pub entropy_boost: f64,
    pub entropy_token_fraction: f64,
    pub seed: u64,
    /// Record dequeue/solution events.
    pub trace: bool,
    /// Keep searching after a solution and collect every solution found.
    pub exhaustive: bool,
    /// Return the materialized search tree (with every node's cached state).
    pub keep_tree: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            budget: Duration::from_secs(180),
            node_budget: None,
            max_depth: DEFAULT_MAX_DEPTH,
            floor: DEFAULT_FLOOR,
            candidate_cap: DEFAULT_CANDIDATE_CAP,
            entropy: false,
            entropy_boost: DEFAULT_ENTROPY_BOOST,
            entropy_token_fraction: DEFAULT_ENTROPY_TOKEN_FRACTION,
            seed: 0,
            trace: false,
            exhaustive: false,
            keep_tree: false,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |m: &str| Err(SearchError::InvalidConfig(m.to_string()));
        if self.max_depth < 1 {
            return bad("max depth must be at least 1");
        }
        if !(0.0..1.0).contains(&self.floor) {
            return bad("floor must be in [0, 1)");
        }
        if !(0.0..1.0).contains(&self.entropy_boost) {
            return bad("entropy boost must be in [0, 1)");
        }
        if !(0.0..=1.0).contains(&self.entropy_token_fraction) {
            return bad("entropy token fraction must be in [0, 1]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SearchError {
    #[error("invalid task: {0}")]
    InvalidTask(String),
    #[error("invalid search config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Guidance(#[from] GuidanceError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    Dequeue { node: usize, depth: usize, log_prob: f64 },
    Solution { node: usize, depth: usize, log_prob: f64, program: String },
    Restart { iteration: usize, nodes: usize },
}

#[derive(Debug, Clone, Default)]
pub struct SearchOutcome {
    pub program: Option<Program>,
    /// Every solution found (only more than one in exhaustive mode).
    pub solutions: Vec<Program>,
    /// Nodes executed, across restarts.
    pub nodes: usize,
    pub restarts: usize,
    /// The last search iteration ran out of queued programs.
    pub exhausted: bool,
    /// Expansions that hit the candidate cap.
    pub truncated_expansions: usize,
    pub elapsed: Duration,
    /// Token sequences of every step enqueued from a root node.
    pub root_candidates: BTreeSet<Vec<TokenId>>,
    pub trace: Vec<TraceEvent>,
    /// One tree per search iteration, when `keep_tree` is set.
    pub trees: Vec<SearchTree>,
}

impl SearchOutcome {
    pub fn solved(&self) -> bool {
        self.program.is_some()
    }
}

/// Sum of per-step log-probabilities.
pub fn joint_log_prob(path: &[StepCandidate]) -> f64 {
    path.iter().map(|c| c.log_prob).sum()
}

/// Wall-clock and node budgets shared across restarts.
#[derive(Debug, Clone)]
pub(crate) struct Budget {
    start: Instant,
    limit: Duration,
    node_limit: Option<usize>,
    nodes: usize,
}

impl Budget {
    pub(crate) fn new(cfg: &SearchConfig) -> Self {
        Budget { start: Instant::now(), limit: cfg.budget, node_limit: cfg.node_budget, nodes: 0 }
    }

    pub(crate) fn spent(&self) -> bool {
        self.node_limit.is_some_and(|n| self.nodes >= n) || self.start.elapsed() >= self.limit
    }

    pub(crate) fn charge(&mut self) {
        self.nodes += 1;
    }

    pub(crate) fn elapsed(&self) -> Duration {
        self.start.elapsed()
    }
}

pub(crate) fn check_task(inputs: &[crate::grid::Grid], targets: &[crate::grid::Grid]) -> Result<(), SearchError> {
    if inputs.is_empty() || inputs.len() != targets.len() {
        return Err(SearchError::InvalidTask(format!(
            "need one target per input and at least one pair, got {} inputs and {} targets",
            inputs.len(),
            targets.len()
        )));
    }
    Ok(())
}
