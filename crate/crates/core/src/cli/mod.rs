//! The `gridsynth` command line: solve, bench, gen-data, vocab and serve.

pub mod bench;

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::guidance::protocol::{serve_connection, serve_tcp, DEFAULT_TIMEOUT_MS};
use crate::guidance::{GuidanceError, GuidanceModel, NoisyOracle, Oracle, RemoteModel, Uniform, DEFAULT_FLOOR};
use crate::search::{SearchConfig, DEFAULT_ENTROPY_BOOST, DEFAULT_MAX_DEPTH};
use crate::tasks::{
    all_tasks, emit_dataset, load_arc_task, oracle_suite, ood_suite, sample_instance, training_suite, write_dataset,
    TaskId, TaskSpec,
};
use crate::token_codec::Vocabulary;
use bench::{run_bench, run_solver, verify, BenchSetup, BenchTask};

pub const EXIT_SOLVED: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_NOT_FOUND: u8 = 2;

/// Where next-token distributions come from.
#[derive(Debug, Clone, PartialEq)]
pub enum GuidanceSpec {
    Oracle,
    /// Noisy oracle: distractor mass and probability of dropping the true step.
    Noisy { noise: f64, miss: f64 },
    Uniform,
    Remote(String),
    /// A child process speaking the protocol on stdin/stdout.
    Exec(String),
}

impl FromStr for GuidanceSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let prob = |v: &str| -> Result<f64, String> {
            match v.parse::<f64>() {
                Ok(p) if (0.0..1.0).contains(&p) => Ok(p),
                _ => Err(format!("`{v}` is not a probability in [0, 1)")),
            }
        };
        match s.split_once(':') {
            None if s == "oracle" => Ok(GuidanceSpec::Oracle),
            None if s == "uniform" => Ok(GuidanceSpec::Uniform),
            Some(("noisy", rest)) => {
                let (noise, miss) = match rest.split_once(':') {
                    Some((n, m)) => (prob(n)?, prob(m)?),
                    None => (prob(rest)?, 0.0),
                };
                Ok(GuidanceSpec::Noisy { noise, miss })
            }
            Some(("remote", addr)) if !addr.is_empty() => Ok(GuidanceSpec::Remote(addr.to_string())),
            Some(("exec", cmd)) if !cmd.trim().is_empty() => Ok(GuidanceSpec::Exec(cmd.to_string())),
            _ => Err(format!("unknown guidance `{s}` (oracle, noisy:EPS[:MISS], uniform, remote:ADDR, exec:CMD)")),
        }
    }
}

impl fmt::Display for GuidanceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GuidanceSpec::Oracle => f.write_str("oracle"),
            GuidanceSpec::Uniform => f.write_str("uniform"),
            GuidanceSpec::Noisy { noise, miss } if *miss == 0.0 => write!(f, "noisy:{noise}"),
            GuidanceSpec::Noisy { noise, miss } => write!(f, "noisy:{noise}:{miss}"),
            GuidanceSpec::Remote(addr) => write!(f, "remote:{addr}"),
            GuidanceSpec::Exec(cmd) => write!(f, "exec:{cmd}"),
        }
    }
}

impl GuidanceSpec {
    pub fn build(&self, specs: &[TaskSpec], vocab: Vocabulary, seed: u64) -> Result<Box<dyn GuidanceModel>, GuidanceError> {
        self.build_with_timeout(specs, vocab, seed, Duration::from_millis(DEFAULT_TIMEOUT_MS))
    }

    pub fn build_with_timeout(
        &self,
        specs: &[TaskSpec],
        vocab: Vocabulary,
        seed: u64,
        timeout: Duration,
    ) -> Result<Box<dyn GuidanceModel>, GuidanceError> {
        Ok(match self {
            GuidanceSpec::Oracle => Box::new(Oracle::new(oracle_suite(specs), vocab)),
            GuidanceSpec::Noisy { noise, miss } => {
                Box::new(NoisyOracle::new(Oracle::new(oracle_suite(specs), vocab), *noise, seed).with_miss(*miss))
            }
            GuidanceSpec::Uniform => Box::new(Uniform::new(vocab)),
            GuidanceSpec::Remote(addr) => Box::new(RemoteModel::connect_tcp(addr.as_str(), vocab, timeout)?),
            GuidanceSpec::Exec(cmd) => {
                let mut words = cmd.split_whitespace().map(str::to_string);
                let program = words.next().unwrap_or_default();
                Box::new(RemoteModel::spawn(&program, &words.collect::<Vec<_>>(), vocab, timeout)?)
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Solver {
    Search,
    Greedy,
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Solver::Search => "search",
            Solver::Greedy => "greedy",
        })
    }
}

#[derive(Debug, Parser)]
#[command(name = "gridsynth", version, about = "Execution-guided program synthesis for grid tasks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one task instance and print the program.
    Solve(SolveArgs),
    /// Run every solver on sampled instances of a suite.
    Bench(BenchArgs),
    /// Write a teacher-forced training dataset as JSON lines.
    GenData(GenDataArgs),
    /// Print the vocabulary manifest and its hash.
    Vocab(VocabArgs),
    /// Serve oracle-style guidance over TCP or stdio.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    /// Next-token guidance: oracle, noisy:EPS[:MISS], uniform, remote:HOST:PORT or exec:CMD.
    #[arg(long, default_value = "oracle")]
    pub guidance: GuidanceSpec,
    /// Wall-clock budget per instance, in seconds.
    #[arg(long)]
    pub budget: Option<f64>,
    /// Node budget per instance; makes runs deterministic.
    #[arg(long)]
    pub budget_nodes: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
    pub max_depth: usize,
    #[arg(long, default_value_t = DEFAULT_FLOOR)]
    pub floor: f64,
    #[arg(long)]
    pub entropy: bool,
    #[arg(long, default_value_t = DEFAULT_ENTROPY_BOOST)]
    pub entropy_boost: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Demonstration pairs per sampled instance.
    #[arg(long, default_value_t = 3)]
    pub n_demos: usize,
    /// Remote guidance request timeout, in milliseconds.
    #[arg(long, default_value_t = DEFAULT_TIMEOUT_MS)]
    pub timeout_ms: u64,
}

impl SearchArgs {
    pub fn config(&self) -> anyhow::Result<SearchConfig> {
        let budget = match (self.budget, self.budget_nodes) {
            (Some(s), _) if !(s > 0.0 && s.is_finite()) => bail!("--budget must be positive"),
            (Some(s), _) => Duration::from_secs_f64(s),
            (None, Some(_)) => Duration::MAX,
            (None, None) => SearchConfig::default().budget,
        };
        let cfg = SearchConfig {
            budget,
            node_budget: self.budget_nodes,
            max_depth: self.max_depth,
            floor: self.floor,
            entropy: self.entropy,
            entropy_boost: self.entropy_boost,
            seed: self.seed,
            ..SearchConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Task id to sample an instance of (Train1..Train14, OOD1..OOD7).
    #[arg(long, conflicts_with = "arc")]
    pub task: Option<TaskId>,
    /// ARC-format task file.
    #[arg(long)]
    pub arc: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Solver::Search)]
    pub solver: Solver,
    /// Write search events as JSON lines to this file.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// train, ood, all, or a directory of ARC task files.
    #[arg(long, default_value = "ood")]
    pub suite: String,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Solver::Greedy, Solver::Search])]
    pub solver: Vec<Solver>,
    #[arg(long, default_value_t = 10)]
    pub n_samples: usize,
    /// Write the JSON report here (the table goes to stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    #[arg(long, default_value_t = 20_000)]
    pub n_samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// train, ood or all.
    #[arg(long, default_value = "train")]
    pub suite: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VocabArgs {
    /// Write the manifest here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:7878", conflicts_with = "stdio")]
    pub listen: String,
    /// Serve a single client on stdin/stdout instead of TCP.
    #[arg(long)]
    pub stdio: bool,
    #[arg(long, default_value = "oracle")]
    pub guidance: GuidanceSpec,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn named_suite(name: &str) -> anyhow::Result<Vec<TaskSpec>> {
    Ok(match name {
        "train" => training_suite(),
        "ood" => ood_suite(),
        "all" => all_tasks(),
        other => bail!("unknown suite `{other}` (train, ood, all)"),
    })
}

fn bench_tasks(suite: &str) -> anyhow::Result<Vec<BenchTask>> {
    if let Ok(specs) = named_suite(suite) {
        return Ok(specs.into_iter().map(BenchTask::Spec).collect());
    }
    let dir = PathBuf::from(suite);
    if !dir.is_dir() {
        bail!("unknown suite `{suite}` (train, ood, all, or a directory of ARC files)");
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok(BenchTask::Fixed(name, load_arc_task(&p)?))
        })
        .collect()
}

fn cmd_solve(args: &SolveArgs) -> anyhow::Result<u8> {
    let cfg = SearchConfig { trace: args.trace.is_some(), ..args.search.config()? };
    let vocab = Vocabulary::standard();
    let instance = match (&args.task, &args.arc) {
        (Some(id), None) => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.search.seed);
            sample_instance(&crate::tasks::task(*id), &mut rng, args.search.n_demos)?
        }
        (None, Some(path)) => load_arc_task(path)?,
        _ => bail!("pass exactly one of --task or --arc"),
    };
    let timeout = Duration::from_millis(args.search.timeout_ms);
    let model = args.search.guidance.build_with_timeout(&all_tasks(), vocab.clone(), args.search.seed, timeout)?;
    let out = run_solver(args.solver, &instance, &model, &cfg)?;

    if let Some(path) = &args.trace {
        let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
        for event in &out.trace {
            serde_json::to_writer(&mut w, event)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
    }
    eprintln!(
        "nodes {} restarts {} truncated {} elapsed {:.3}s",
        out.nodes,
        out.restarts,
        out.truncated_expansions,
        out.elapsed.as_secs_f64()
    );
    match out.program {
        Some(p) => {
            print!("{p}");
            if !verify(&p, &instance, vocab.max_refs()) {
                eprintln!("warning: program does not generalize to the test pairs");
            }
            Ok(EXIT_SOLVED)
        }
        None => {
            eprintln!("no program found");
            Ok(EXIT_NOT_FOUND)
        }
    }
}

fn cmd_bench(args: &BenchArgs) -> anyhow::Result<u8> {
    let tasks = bench_tasks(&args.suite)?;
    let oracle_specs = all_tasks();
    let setup = BenchSetup {
        suite_name: args.suite.clone(),
        tasks,
        oracle_specs: &oracle_specs,
        solvers: args.solver.clone(),
        guidance: args.search.guidance.clone(),
        n_samples: args.n_samples,
        n_demos: args.search.n_demos,
        cfg: args.search.config()?,
        vocab: Vocabulary::standard(),
    };
    let report = run_bench(&setup);
    print!("{}", report.render_table());
    if let Some(path) = &args.out {
        std::fs::write(path, report.to_json() + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(EXIT_SOLVED)
}

fn cmd_gen_data(args: &GenDataArgs) -> anyhow::Result<u8> {
    let specs = named_suite(&args.suite)?;
    let vocab = Vocabulary::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let samples = emit_dataset(&specs, args.n_samples, &vocab, &mut rng)?;
    let file = File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    write_dataset(&samples, BufWriter::new(file))?;
    eprintln!("wrote {} samples to {}", samples.len(), args.out.display());
    println!("{}", vocab.manifest_hash());
    Ok(EXIT_SOLVED)
}

fn cmd_vocab(args: &VocabArgs) -> anyhow::Result<u8> {
    let vocab = Vocabulary::standard();
    match &args.out {
        Some(path) => {
            std::fs::write(path, vocab.to_manifest())?;
            println!("{}", vocab.manifest_hash());
        }
        None => {
            print!("{}", vocab.to_manifest());
            eprintln!("sha256 {}", vocab.manifest_hash());
        }
    }
    Ok(EXIT_SOLVED)
}

fn cmd_serve(args: &ServeArgs) -> anyhow::Result<u8> {
    if matches!(args.guidance, GuidanceSpec::Remote(_) | GuidanceSpec::Exec(_)) {
        bail!("cannot serve remote guidance");
    }
    let model = args.guidance.build(&all_tasks(), Vocabulary::standard(), args.seed)?;
    if args.stdio {
        let mut stream = StdioStream { input: std::io::stdin().lock(), output: std::io::stdout().lock() };
        serve_connection(&model, &mut stream)?;
        return Ok(EXIT_SOLVED);
    }
    eprintln!("serving {} on {}", args.guidance, args.listen);
    serve_tcp(Arc::new(model), args.listen.as_str())?;
    Ok(EXIT_SOLVED)
}

struct StdioStream<R, W> {
    input: R,
    output: W,
}

impl<R: Read, W> Read for StdioStream<R, W> {
    fn read(&mut self, buf: &mut [u8]) -> std::io::Result<usize> {
        self.input.read(buf)
    }
}

impl<R, W: Write> Write for StdioStream<R, W> {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.output.write(buf)
    }

    fn flush(&mut self) -> std::io::Result<()> {
        self.output.flush()
    }
}

pub fn run(cli: Cli) -> ExitCode {
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::GenData(a) => cmd_gen_data(a),
        Command::Vocab(a) => cmd_vocab(a),
        Command::Serve(a) => cmd_serve(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
