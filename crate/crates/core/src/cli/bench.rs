use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{GuidanceSpec, Solver};
use crate::dsl::{run_program_with, Program};
use crate::grid::{grids_equal, Grid};
use crate::guidance::GuidanceModel;
use crate::search::{greedy_rollout, tree_search, SearchConfig, SearchOutcome};
use crate::tasks::{sample_instance, TaskInstance, TaskSpec};
use crate::token_codec::Vocabulary;

pub const REPORT_VERSION: u32 = 1;

/// A benchmark row: a named instance source.
pub enum BenchTask {
    Spec(TaskSpec),
    /// A fixed instance loaded from disk; sampled once regardless of `n_samples`.
    Fixed(String, TaskInstance),
}

impl BenchTask {
    pub fn name(&self) -> String {
        match self {
            BenchTask::Spec(s) => s.id.to_string(),
            BenchTask::Fixed(name, _) => name.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub suite: String,
    pub solvers: Vec<String>,
    pub guidance: String,
    pub n_samples: usize,
    pub n_demos: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget_secs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget_nodes: Option<usize>,
    pub max_depth: usize,
    pub floor: f64,
    pub entropy: bool,
    pub entropy_boost: f64,
    pub seed: u64,
    pub manifest_hash: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct CellStats {
    pub successes: usize,
    pub attempts: usize,
    /// Per-sample wall-clock seconds; omitted in node-budget mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seconds: Option<Vec<f64>>,
    pub nodes: Vec<usize>,
    pub errors: Vec<String>,
}

impl CellStats {
    pub fn rate(&self) -> f64 {
        if self.attempts == 0 {
            0.0
        } else {
            self.successes as f64 / self.attempts as f64
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub task: String,
    pub cells: BTreeMap<String, CellStats>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub version: u32,
    pub config: ConfigEcho,
    pub rows: Vec<BenchRow>,
    pub totals: BTreeMap<String, CellStats>,
}

impl BenchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render_table(&self) -> String {
        let solvers = &self.config.solvers;
        let mut out = String::new();
        let _ = write!(out, "{:<10}", "task");
        for s in solvers {
            let _ = write!(out, " {s:>10}");
        }
        out.push('\n');
        let mut line = |name: &str, cells: &BTreeMap<String, CellStats>| {
            let _ = write!(out, "{name:<10}");
            for s in solvers {
                let c = cells.get(s).cloned().unwrap_or_default();
                let _ = write!(out, " {:>9.0}%", 100.0 * c.rate());
            }
            out.push('\n');
        };
        for row in &self.rows {
            line(&row.task, &row.cells);
        }
        line("total", &self.totals);
        out
    }
}

/// True when `program` maps every demo and test input to its target.
pub fn verify(program: &Program, instance: &TaskInstance, max_refs: usize) -> bool {
    let check = |pairs: &[(Grid, Grid)]| {
        if pairs.is_empty() {
            return true;
        }
        let inputs: Vec<Grid> = pairs.iter().map(|(i, _)| i.clone()).collect();
        match run_program_with(program, &inputs, max_refs) {
            Ok(out) => out.iter().zip(pairs).all(|(o, (_, t))| grids_equal(o, t)),
            Err(_) => false,
        }
    };
    check(&instance.demos) && check(&instance.test)
}

pub fn run_solver<M: GuidanceModel + ?Sized>(
    solver: Solver,
    instance: &TaskInstance,
    model: &M,
    cfg: &SearchConfig,
) -> Result<SearchOutcome, crate::search::SearchError> {
    let (inputs, targets) = (instance.demo_inputs(), instance.demo_targets());
    match solver {
        Solver::Search => tree_search(&inputs, &targets, model, cfg),
        Solver::Greedy => greedy_rollout(&inputs, &targets, model, cfg),
    }
}

/// Seed for one (task, sample) cell, independent of scheduling order.
pub fn cell_seed(seed: u64, task: &str, sample: usize) -> u64 {
    let mut h = DefaultHasher::new();
    (seed, task, sample).hash(&mut h);
    h.finish()
}

pub struct BenchSetup<'a> {
    pub suite_name: String,
    pub tasks: Vec<BenchTask>,
    /// Ground truths handed to oracle-based guidance.
    pub oracle_specs: &'a [TaskSpec],
    pub solvers: Vec<Solver>,
    pub guidance: GuidanceSpec,
    pub n_samples: usize,
    pub n_demos: usize,
    pub cfg: SearchConfig,
    pub vocab: Vocabulary,
}

struct CellResult {
    task: usize,
    solver: Solver,
    solved: bool,
    nodes: usize,
    elapsed: Duration,
    error: Option<String>,
}

pub fn run_bench(setup: &BenchSetup<'_>) -> BenchReport {
    let node_mode = setup.cfg.node_budget.is_some();
    let mut jobs = Vec::new();
    for (t, task) in setup.tasks.iter().enumerate() {
        let samples = match task {
            BenchTask::Spec(_) => setup.n_samples,
            BenchTask::Fixed(..) => setup.n_samples.min(1),
        };
        for i in 0..samples {
            jobs.push((t, i));
        }
    }

    let results: Vec<Vec<CellResult>> = jobs
        .par_iter()
        .map(|&(t, i)| {
            let task = &setup.tasks[t];
            let seed = cell_seed(setup.cfg.seed, &task.name(), i);
            let instance = match task {
                BenchTask::Spec(spec) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    sample_instance(spec, &mut rng, setup.n_demos).map_err(|e| e.to_string())
                }
                BenchTask::Fixed(_, inst) => Ok(inst.clone()),
            };
            setup
                .solvers
                .iter()
                .map(|&solver| {
                    let fail = |error: String| CellResult {
                        task: t,
                        solver,
                        solved: false,
                        nodes: 0,
                        elapsed: Duration::ZERO,
                        error: Some(error),
                    };
                    let instance = match &instance {
                        Ok(inst) => inst,
                        Err(e) => return fail(e.clone()),
                    };
                    let model = match setup.guidance.build(setup.oracle_specs, setup.vocab.clone(), seed) {
                        Ok(m) => m,
                        Err(e) => return fail(e.to_string()),
                    };
                    let cfg = SearchConfig { seed, ..setup.cfg.clone() };
                    match run_solver(solver, instance, &model, &cfg) {
                        Ok(out) => CellResult {
                            task: t,
                            solver,
                            solved: out.program.as_ref().is_some_and(|p| verify(p, instance, setup.vocab.max_refs())),
                            nodes: out.nodes,
                            elapsed: out.elapsed,
                            error: None,
                        },
                        Err(e) => fail(e.to_string()),
                    }
                })
                .collect()
        })
        .collect();

    let solver_names: Vec<String> = setup.solvers.iter().map(|s| s.to_string()).collect();
    let empty_cell = || CellStats { seconds: (!node_mode).then(Vec::new), ..CellStats::default() };
    let mut rows: Vec<BenchRow> = setup
        .tasks
        .iter()
        .map(|t| BenchRow { task: t.name(), cells: solver_names.iter().map(|s| (s.clone(), empty_cell())).collect() })
        .collect();
    let mut totals: BTreeMap<String, CellStats> = solver_names.iter().map(|s| (s.clone(), empty_cell())).collect();

    for r in results.into_iter().flatten() {
        let name = r.solver.to_string();
        for cell in [rows[r.task].cells.get_mut(&name).expect("cell"), totals.get_mut(&name).expect("total")] {
            cell.attempts += 1;
            cell.successes += r.solved as usize;
            cell.nodes.push(r.nodes);
            if let Some(secs) = &mut cell.seconds {
                secs.push(r.elapsed.as_secs_f64());
            }
            if let Some(e) = &r.error {
                cell.errors.push(e.clone());
            }
        }
    }
    // totals keep counts only
    for cell in totals.values_mut() {
        cell.nodes.clear();
        cell.seconds = None;
    }

    BenchReport {
        version: REPORT_VERSION,
        config: ConfigEcho {
            suite: setup.suite_name.clone(),
            solvers: solver_names,
            guidance: setup.guidance.to_string(),
            n_samples: setup.n_samples,
            n_demos: setup.n_demos,
            budget_secs: (!node_mode).then(|| setup.cfg.budget.as_secs_f64()),
            budget_nodes: setup.cfg.node_budget,
            max_depth: setup.cfg.max_depth,
            floor: setup.cfg.floor,
            entropy: setup.cfg.entropy,
            entropy_boost: setup.cfg.entropy_boost,
            seed: setup.cfg.seed,
            manifest_hash: setup.vocab.manifest_hash(),
        },
        rows,
        totals,
    }
}
