use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use gridsynth::dsl::{eliminate_dels, execute, run_program, Arg, InstructionStep, Primitive, Program};
use gridsynth::guidance::{build_oracle, NoisyOracle, Oracle, Uniform};
use gridsynth::search::{greedy_rollout, tree_search, SearchConfig};
use gridsynth::tasks::{all_tasks, ood_suite, oracle_suite, random_grid, sample_instance, task, SamplerParams, TaskId};
use gridsynth::token_codec::{decode_instruction, encode_instruction, Token, TokenId, Vocabulary};
use gridsynth::{grids_equal, Attribute, Grid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::Regex;

type Verdict = (bool, String);

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn oracle() -> Oracle {
    build_oracle(&oracle_suite(&all_tasks()), Vocabulary::standard())
}

fn outputs_match(program: &Program, inputs: &[Grid], targets: &[Grid]) -> bool {
    match run_program(program, inputs) {
        Ok(out) => out.len() == targets.len() && out.iter().zip(targets).all(|(a, b)| grids_equal(a, b)),
        Err(_) => false,
    }
}

fn c1_oracle_solvability() -> Verdict {
    let o = oracle();
    let cfg = SearchConfig { budget: Duration::from_secs(10), node_budget: Some(10_000), ..SearchConfig::default() };
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut solved = 0;
    for spec in all_tasks() {
        for sample in 0..10 {
            let inst = sample_instance(&spec, &mut rng(1000 + sample), 3).unwrap();
            let out = tree_search(&inst.demo_inputs(), &inst.demo_targets(), &o, &cfg).unwrap();
            let ok = out.program.as_ref().is_some_and(|p| {
                let (ins, outs): (Vec<Grid>, Vec<Grid>) = inst.demos.iter().chain(&inst.test).cloned().unzip();
                outputs_match(p, &ins, &outs)
            });
            if ok {
                solved += 1;
            } else {
                failures.push(format!("{}#{sample}", spec.id));
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && elapsed < Duration::from_secs(300);
    (pass, format!("{solved}/210 instances solved in {:.1}s (limit 300s) failures={failures:?}", elapsed.as_secs_f64()))
}

/// Every complete step over the restricted catalog when `n` slots are live.
fn brute_steps(n: usize) -> Vec<InstructionStep> {
    let mut args: Vec<Arg> = (0..10).map(Arg::Const).collect();
    for i in 0..n {
        args.push(Arg::Ref(i));
        args.extend(Attribute::ALL.iter().map(|&a| Arg::RefAttr(i, a)));
    }
    let mut steps = Vec::new();
    for p in [Primitive::Identity, Primitive::ColorOf] {
        steps.extend(args.iter().map(|a| InstructionStep::new(p, vec![a.clone()])));
    }
    steps.extend((0..n).map(|i| InstructionStep::new(Primitive::Del, vec![Arg::Ref(i)])));
    steps
}

fn brute_force(inputs: &[Grid], targets: &[Grid], depth: usize) -> (BTreeSet<String>, BTreeSet<String>) {
    let (mut expanded, mut solutions) = (BTreeSet::new(), BTreeSet::new());
    let mut frontier = vec![Program::default()];
    for level in 0..=depth {
        let mut next = Vec::new();
        for p in frontier {
            expanded.insert(p.to_string());
            let Ok(state) = execute(&p, inputs, 10) else { continue };
            if state.matches(targets) {
                solutions.insert(p.to_string());
            }
            if level < depth {
                for step in brute_steps(state.num_slots()) {
                    let mut child = p.clone();
                    child.steps.push(step);
                    next.push(child);
                }
            }
        }
        frontier = next;
    }
    (expanded, solutions)
}

fn c2_brute_force_equivalence() -> Verdict {
    let vocab = Vocabulary::new(vec![Primitive::Identity, Primitive::ColorOf, Primitive::Del], 10);
    let model = Uniform::new(vocab);
    let cfg = SearchConfig {
        max_depth: 2,
        floor: 0.0,
        exhaustive: true,
        keep_tree: true,
        node_budget: Some(1_000_000),
        budget: Duration::from_secs(120),
        ..SearchConfig::default()
    };
    let params = SamplerParams { min_dim: 1, max_dim: 3, ..SamplerParams::default() };
    let mut r = rng(2);
    let mut mismatches = Vec::new();
    let (mut total_nodes, mut total_solutions) = (0, 0);
    for t in 0..20 {
        let inputs: Vec<Grid> = (0..2).map(|_| random_grid(&mut r, &params)).collect();
        let targets: Vec<Grid> =
            if t % 2 == 0 { inputs.clone() } else { (0..2).map(|_| random_grid(&mut r, &params)).collect() };
        let out = tree_search(&inputs, &targets, &model, &cfg).unwrap();
        let tree = &out.trees[0];
        let searched: BTreeSet<String> = (0..tree.nodes.len()).map(|id| tree.path(id).to_string()).collect();
        let found: BTreeSet<String> = out.solutions.iter().map(|p| p.to_string()).collect();
        let (expanded, solutions) = brute_force(&inputs, &targets, 2);
        if searched != expanded || found != solutions || tree.nodes.len() != expanded.len() {
            mismatches.push(t);
        }
        total_nodes += expanded.len();
        total_solutions += solutions.len();
    }
    (
        mismatches.is_empty(),
        format!("20 micro-tasks, {total_nodes} programs and {total_solutions} solutions compared, mismatched tasks={mismatches:?}"),
    )
}

fn c3_search_beats_greedy() -> Verdict {
    let cfg = SearchConfig { budget: Duration::from_secs(10), node_budget: Some(20_000), ..SearchConfig::default() };
    let (mut search, mut greedy, mut n) = (0, 0, 0);
    for spec in ood_suite() {
        for sample in 0..10u64 {
            let inst = sample_instance(&spec, &mut rng(3000 + sample), 3).unwrap();
            let model = NoisyOracle::new(oracle(), 0.3, 31 * sample + 7);
            let (ins, outs) = (inst.demo_inputs(), inst.demo_targets());
            search += tree_search(&ins, &outs, &model, &cfg).unwrap().solved() as usize;
            greedy += greedy_rollout(&ins, &outs, &model, &cfg).unwrap().solved() as usize;
            n += 1;
        }
    }
    let (s, g) = (100.0 * search as f64 / n as f64, 100.0 * greedy as f64 / n as f64);
    (s - g >= 30.0, format!("search {s:.0}% vs greedy {g:.0}% over {n} instances (gap {:.0} points, need 30)", s - g))
}

fn c4_surprising_solution() -> Verdict {
    let spec = task(TaskId::Ood(2));
    let params = SamplerParams { min_dim: 3, max_dim: 12, ..SamplerParams::default() };
    let mut r = rng(4);
    let pair = |r: &mut ChaCha8Rng| {
        let g = random_grid(r, &params);
        let mut rows = g.to_rows();
        for row in &mut rows {
            *row.last_mut().unwrap() = 0;
        }
        let input = Grid::from_rows(&rows).unwrap();
        let target = run_program(&spec.ground_truth, std::slice::from_ref(&input)).unwrap().remove(0);
        (input, target)
    };
    let demos: Vec<(Grid, Grid)> = (0..3).map(|_| pair(&mut r)).collect();
    let test = pair(&mut r);
    let (ins, outs): (Vec<Grid>, Vec<Grid>) = demos.iter().cloned().unzip();

    let mut wins = Vec::new();
    for seed in 0..5u64 {
        let model = NoisyOracle::new(oracle(), 0.3, seed);
        let cfg = SearchConfig { budget: Duration::from_secs(60), entropy: true, seed, ..SearchConfig::default() };
        let out = tree_search(&ins, &outs, &model, &cfg).unwrap();
        let shorter = out.program.as_ref().is_some_and(|p| {
            p.len() < spec.ground_truth.len()
                && outputs_match(p, &ins, &outs)
                && outputs_match(p, std::slice::from_ref(&test.0), std::slice::from_ref(&test.1))
        });
        wins.push(shorter);
    }
    let n = wins.iter().filter(|&&w| w).count();
    (n >= 3, format!("{n}/5 seeds found a verified program shorter than the {}-step ground truth", spec.ground_truth.len()))
}

fn c5_del_semantics() -> Verdict {
    let program: Program = "equal(N0.c, 0)\nswitch(N1, 0, 2)\ndel(N1)\nset_pixels(N0, N0.x, N0.y, N1)\n".parse().unwrap();
    let rewritten = eliminate_dels(&program).unwrap();
    let params = SamplerParams { min_dim: 1, max_dim: 30, ..SamplerParams::default() };
    let mut r = rng(5);
    let (mut recolored, mut equivalent) = (0, 0);
    for _ in 0..50 {
        let g = random_grid(&mut r, &params);
        let out = run_program(&program, std::slice::from_ref(&g)).unwrap().remove(0);
        let cells_ok = out.width() == g.width()
            && out.height() == g.height()
            && g.cells().iter().zip(out.cells()).all(|(&a, &b)| b == if a == 0 { 0 } else { 2 });
        recolored += cells_ok as usize;
        let alt = run_program(&rewritten, std::slice::from_ref(&g)).unwrap().remove(0);
        equivalent += (alt == out) as usize;
    }
    let pass = recolored == 50 && equivalent == 50 && !rewritten.steps.iter().any(|s| s.is_del());
    (pass, format!("{recolored}/50 recolored cell-for-cell, {equivalent}/50 identical after del elimination"))
}

fn random_arg(r: &mut ChaCha8Rng) -> Arg {
    match r.gen_range(0..3) {
        0 => Arg::Const(r.gen_range(0..10)),
        1 => Arg::Ref(r.gen_range(0..10)),
        _ => Arg::RefAttr(r.gen_range(0..10), Attribute::ALL[r.gen_range(0..9)]),
    }
}

fn random_step(r: &mut ChaCha8Rng) -> InstructionStep {
    let p = Primitive::ALL[r.gen_range(0..15)];
    if p == Primitive::Del {
        return InstructionStep::new(p, vec![Arg::Ref(r.gen_range(0..10))]);
    }
    InstructionStep::new(p, (0..p.arity()).map(|_| random_arg(r)).collect())
}

/// Spells a token sequence over a small alphabet so the instruction grammar
/// becomes a regular expression.
fn spell(tokens: &[TokenId], vocab: &Vocabulary) -> String {
    tokens
        .iter()
        .map(|&t| match vocab.classify(t) {
            Some(Token::Int(_)) => 'k',
            Some(Token::Ref(_)) => 'r',
            Some(Token::Attr(_)) => 'a',
            Some(Token::Sep) => 's',
            Some(Token::ArgSep) => ',',
            Some(Token::Eos) => 'e',
            Some(Token::Prim(Primitive::Del)) => 'd',
            Some(Token::Prim(p)) => ['?', '1', '2', '3', '4'][p.arity()],
            None => 'x',
        })
        .collect()
}

fn c6_codec_round_trip() -> Verdict {
    let vocab = Vocabulary::standard();
    let mut r = rng(6);
    let mut round_trips = 0;
    for _ in 0..10_000 {
        let step = random_step(&mut r);
        let tokens = encode_instruction(&step, &vocab).unwrap();
        round_trips += (decode_instruction(&tokens, &vocab).as_ref() == Ok(&step)) as usize;
    }

    let arg = "(?:k|ra?)";
    let grammar = Regex::new(&format!(
        "^(?:dsre|1s{arg}e|2s{arg},{arg}e|3s{arg},{arg},{arg}e|4s{arg},{arg},{arg},{arg}e)$"
    ))
    .unwrap();
    let (mut agree, mut accepted) = (0, 0);
    for i in 0..10_000 {
        let tokens: Vec<TokenId> = match i % 3 {
            0 => (0..r.gen_range(1..14)).map(|_| r.gen_range(0..vocab.size() as TokenId + 2)).collect(),
            1 => {
                let mut t = encode_instruction(&random_step(&mut r), &vocab).unwrap();
                let at = r.gen_range(0..t.len());
                match r.gen_range(0..3) {
                    0 => t[at] = r.gen_range(0..vocab.size() as TokenId),
                    1 => {
                        t.remove(at);
                    }
                    _ => t.insert(at, r.gen_range(0..vocab.size() as TokenId)),
                }
                t
            }
            _ => encode_instruction(&random_step(&mut r), &vocab).unwrap(),
        };
        let decoded = catch_unwind(|| decode_instruction(&tokens, &vocab).is_ok());
        let Ok(decoded) = decoded else { continue };
        accepted += decoded as usize;
        agree += (decoded == grammar.is_match(&spell(&tokens, &vocab))) as usize;
    }
    (
        round_trips == 10_000 && agree == 10_000,
        format!("{round_trips}/10000 steps round-trip, {agree}/10000 token sequences agree with the grammar ({accepted} accepted)"),
    )
}

fn c7_entropy_superset() -> Verdict {
    let base = SearchConfig { budget: Duration::from_secs(30), node_budget: Some(5_000), ..SearchConfig::default() };
    let with = SearchConfig { entropy: true, entropy_boost: 0.05, ..base.clone() };
    let (mut runs, mut solved_off, mut solved_on, mut subset_ok) = (0, 0, 0, true);
    let (mut union_off, mut union_on) = (BTreeSet::new(), BTreeSet::new());
    'scan: for seed in 0..200u64 {
        for spec in ood_suite() {
            let inst = sample_instance(&spec, &mut rng(7000 + seed), 3).unwrap();
            let model = NoisyOracle::new(oracle(), 0.3, seed).with_miss(0.3);
            let (ins, outs) = (inst.demo_inputs(), inst.demo_targets());
            let off = tree_search(&ins, &outs, &model, &SearchConfig { seed, ..base.clone() }).unwrap();
            if off.solved() {
                continue;
            }
            let on = tree_search(&ins, &outs, &model, &SearchConfig { seed, ..with.clone() }).unwrap();
            solved_off += off.solved() as usize;
            solved_on += on.solved() as usize;
            subset_ok &= off.root_candidates.is_subset(&on.root_candidates);
            union_off.extend(off.root_candidates.into_iter().map(|t| (runs, t)));
            union_on.extend(on.root_candidates.into_iter().map(|t| (runs, t)));
            runs += 1;
            if runs == 20 {
                break 'scan;
            }
        }
    }
    let pass = runs == 20 && solved_on >= solved_off && subset_ok && union_on.len() > union_off.len();
    (
        pass,
        format!(
            "{runs} failing runs: solved {solved_off} -> {solved_on}, root candidates {} -> {}",
            union_off.len(),
            union_on.len()
        ),
    )
}

fn c9_bench_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_gridsynth"))
            .args(["bench", "--suite", "all", "--guidance", "oracle", "--budget-nodes", "2000", "--seed", "9"])
            .args(["--n-samples", "3", "--out", path.to_str().unwrap()])
            .output()
            .unwrap()
            .status;
        assert!(status.success());
        std::fs::read(path).unwrap()
    };
    let (a, b) = (run("a.json"), run("b.json"));
    (a == b, format!("two oracle bench reports of {} bytes are {}", a.len(), if a == b { "identical" } else { "different" }))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("C1", c1_oracle_solvability),
        ("C2", c2_brute_force_equivalence),
        ("C3", c3_search_beats_greedy),
        ("C4", c4_surprising_solution),
        ("C5", c5_del_semantics),
        ("C6", c6_codec_round_trip),
        ("C7", c7_entropy_superset),
        ("C9", c9_bench_determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let (pass, detail) = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| (false, "panicked".into()));
        failed += !pass as usize;
        println!("{} {name} {detail}", if pass { "PASS" } else { "FAIL" });
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
