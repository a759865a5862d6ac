//! `trnrp` — command-line front end for the restoration-routing solver.
//!
//! Subcommands cover the full experiment pipeline: `gen` builds random
//! instances, `train` fits value tables, `oracle` prints exact values for
//! small networks, `eval` compares policies over shared fault patterns,
//! `run` executes a JSON manifest end to end, and `inspect` summarizes a
//! table file. Exit codes: 0 success, 1 usage error, 2 runtime failure.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use trnrp_core::evaluate::evaluate;
use trnrp_core::gen::{generate, GenConfig};
use trnrp_core::geom::Region;
use trnrp_core::instance::Instance;
use trnrp_core::learner::{train_with_progress, TrainConfig};
use trnrp_core::oracle::ExactSolver;
use trnrp_core::policy::Policy;
use trnrp_core::state::BeliefState;
use trnrp_core::table::{AggregationMode, ValueTable};

#[derive(Parser)]
#[command(
    name = "trnrp",
    version,
    about = "Repair-crew routing for blacked-out power distribution trees"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance and write it as JSON
    Gen(GenArgs),
    /// Train a value table on an instance
    Train(TrainArgs),
    /// Print exact state values (small instances only)
    Oracle(OracleArgs),
    /// Compare policies over a shared set of fault patterns
    Eval(EvalArgs),
    /// Execute a JSON experiment manifest: gen, train, eval
    Run(RunArgs),
    /// Summarize a trained table file
    Inspect(InspectArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Number of demand nodes
    #[arg(long)]
    nodes: usize,
    /// Service-region shape: square, rectangle, or circle
    #[arg(long, default_value = "square")]
    shape: String,
    /// Region dimensions: side / width,height / radius
    #[arg(long, value_delimiter = ',', default_value = "30")]
    dims: Vec<f64>,
    /// Maximum node degree in the distribution tree
    #[arg(long, default_value_t = 3)]
    degree: usize,
    /// Number of depth-reduction re-parenting moves to attempt
    #[arg(long, default_value_t = 0)]
    reduce: usize,
    /// Repair time per faulty node
    #[arg(long, default_value_t = 3.0)]
    repair_time: f64,
    /// Independent fault probability of each non-source node
    #[arg(long, default_value_t = 0.25)]
    fault_prob: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output instance file
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Table granularity: full, sa1, sa2, or sa3
    #[arg(long, default_value = "full")]
    mode: String,
    /// Dominance pruning of candidate moves: on or off
    #[arg(long, default_value = "on")]
    prune: String,
    /// Stopping threshold on per-batch value movement
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Hard cap on training episodes
    #[arg(long, default_value_t = 1_000_000)]
    max_iters: u64,
    /// Episodes before the stopping rule may fire
    #[arg(long, default_value_t = 100_000)]
    warmup: u64,
    /// Episodes per progress batch
    #[arg(long, default_value_t = 10_000)]
    batch: u64,
    /// Numerator of the visit-count exploration schedule
    #[arg(long, default_value_t = 1.0)]
    exploration: f64,
    /// Suppress per-batch progress lines
    #[arg(long)]
    quiet: bool,
    /// Output table file
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Belief state to value, e.g. "L:1;S:1;C:;F:2;U:3" (default: initial)
    #[arg(long)]
    state: Option<String>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Named table files, e.g. --table snrr=full.table.json (repeatable)
    #[arg(long = "table", value_name = "NAME=PATH")]
    tables: Vec<String>,
    /// Comma-separated policies: snrr, sa1, sa2, sa3, ps, nn
    #[arg(long, value_delimiter = ',', required = true)]
    policies: Vec<String>,
    #[arg(long, default_value_t = 1000)]
    realizations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// JSON manifest describing instances, training, and evaluation
    manifest: PathBuf,
}

#[derive(Args)]
struct InspectArgs {
    #[arg(long)]
    table: PathBuf,
    /// Number of most-visited entries to print
    #[arg(long, default_value_t = 10)]
    top: usize,
}

/// Errors that should exit 1 (bad arguments) vs 2 (failed execution).
enum CliError {
    Usage(String),
    Runtime(String),
}

type CliResult<T> = Result<T, CliError>;

impl From<trnrp_core::Error> for CliError {
    fn from(e: trnrp_core::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn main() -> ExitCode {
    // Die quietly when a downstream pipe closes (e.g. `trnrp oracle | head`)
    // instead of panicking on the failed write.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Gen(args) => cmd_gen(args),
        Command::Train(args) => cmd_train(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Run(args) => cmd_run(args),
        Command::Inspect(args) => cmd_inspect(args),
    }
}

fn parse_region(shape: &str, dims: &[f64]) -> CliResult<Region> {
    match (shape, dims) {
        ("square", [side]) => Ok(Region::square(*side)),
        ("rectangle", [w, h]) => Ok(Region::rectangle(*w, *h)),
        ("circle", [r]) => Ok(Region::circle(*r)),
        ("square", _) => Err(usage("--shape square takes one dimension: --dims SIDE")),
        ("rectangle", _) => Err(usage(
            "--shape rectangle takes two dimensions: --dims WIDTH,HEIGHT",
        )),
        ("circle", _) => Err(usage("--shape circle takes one dimension: --dims RADIUS")),
        _ => Err(usage(format!(
            "unknown shape '{shape}' (expected square, rectangle, or circle)"
        ))),
    }
}

fn parse_mode(mode: &str) -> CliResult<AggregationMode> {
    mode.parse().map_err(|_| {
        usage(format!(
            "unknown mode '{mode}' (expected full, sa1, sa2, or sa3)"
        ))
    })
}

fn parse_prune(prune: &str) -> CliResult<bool> {
    match prune {
        "on" => Ok(true),
        "off" => Ok(false),
        other => Err(usage(format!("--prune takes on or off, got '{other}'"))),
    }
}

fn cmd_gen(args: GenArgs) -> CliResult<()> {
    let region = parse_region(&args.shape, &args.dims)?;
    let instance = generate(&GenConfig {
        nodes: args.nodes,
        region,
        degree_bound: args.degree,
        reduce: args.reduce,
        repair_time: args.repair_time,
        fault_prob: args.fault_prob,
        seed: args.seed,
    })?;
    instance.save(&args.out)?;
    println!(
        "wrote {} ({} nodes, depth {}, degree bound {}, seed {})",
        args.out.display(),
        instance.n(),
        instance.depth(),
        instance.degree_bound,
        instance.seed
    );
    Ok(())
}

fn cmd_train(args: TrainArgs) -> CliResult<()> {
    let mode = parse_mode(&args.mode)?;
    let prune = parse_prune(&args.prune)?;
    let instance = Instance::load(&args.instance)?;
    let config = TrainConfig {
        seed: args.seed,
        stop_threshold: args.gamma,
        max_iterations: args.max_iters,
        warmup_iterations: args.warmup,
        batch_size: args.batch,
        exploration_constant: args.exploration,
        ..TrainConfig::default()
    };
    let table = train_with_progress(&instance, &config, mode, prune, |p| {
        if !args.quiet {
            let delta = match p.delta {
                Some(d) => format!("{d:.6}"),
                None => "-".to_string(),
            };
            println!(
                "batch iter={} keys={} new={} delta={}",
                p.iterations, p.keys, p.new_keys, delta
            );
        }
    })?;
    table.save(&args.out)?;
    let stamp = table.stamp.as_ref().expect("trained table carries a stamp");
    println!(
        "wrote {} ({} {} keys, {} iterations, stopped_by_rule={})",
        args.out.display(),
        table.len(),
        mode,
        table.iterations(),
        stamp.stopped_by_rule
    );
    Ok(())
}

fn cmd_oracle(args: OracleArgs) -> CliResult<()> {
    let instance = Instance::load(&args.instance)?;
    let mut solver = ExactSolver::new(&instance)?;
    let state = match &args.state {
        Some(text) => {
            let state: BeliefState = text
                .parse()
                .map_err(|e: trnrp_core::Error| usage(e.to_string()))?;
            state
                .check_feasible(&instance)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            state
        }
        None => BeliefState::initial(instance.n()),
    };
    println!("state\t{state}");
    println!("H\t{}", solver.value(&state));
    let mut actions: Vec<usize> = state.actions().collect();
    actions.sort_unstable();
    for action in actions {
        let q = solver
            .action_value(&state, action)
            .expect("listed action is available");
        println!("Q\t{action}\t{q}");
    }
    Ok(())
}

/// Loads `NAME=PATH` table arguments and checks each table's granularity
/// matches its policy name (snrr carries a full-granularity table).
fn load_tables(args: &[String]) -> CliResult<Vec<(String, ValueTable)>> {
    let mut out = Vec::new();
    for arg in args {
        let Some((name, path)) = arg.split_once('=') else {
            return Err(usage(format!("--table takes NAME=PATH, got '{arg}'")));
        };
        let expected = match name {
            "snrr" => AggregationMode::Full,
            "sa1" => AggregationMode::Sa1,
            "sa2" => AggregationMode::Sa2,
            "sa3" => AggregationMode::Sa3,
            other => {
                return Err(usage(format!(
                    "unknown table name '{other}' (expected snrr, sa1, sa2, or sa3)"
                )))
            }
        };
        let table = ValueTable::load(Path::new(path))?;
        if table.mode() != expected {
            return Err(usage(format!(
                "table '{name}' at {path} has granularity {}, expected {expected}",
                table.mode()
            )));
        }
        out.push((name.to_string(), table));
    }
    Ok(out)
}

fn build_policies<'a>(
    names: &[String],
    tables: &'a [(String, ValueTable)],
) -> CliResult<Vec<(String, Policy<'a>)>> {
    let mut out = Vec::new();
    for name in names {
        let policy = match name.as_str() {
            "ps" => Policy::PrioritySequence,
            "nn" => Policy::NearestNeighbor,
            "snrr" | "sa1" | "sa2" | "sa3" => {
                let Some((_, table)) = tables.iter().find(|(n, _)| n == name) else {
                    return Err(usage(format!(
                        "policy '{name}' needs a matching --table {name}=PATH"
                    )));
                };
                Policy::TableGreedy { table, prune: true }
            }
            other => {
                return Err(usage(format!(
                    "unknown policy '{other}' (expected snrr, sa1, sa2, sa3, ps, or nn)"
                )))
            }
        };
        out.push((name.clone(), policy));
    }
    Ok(out)
}

fn cmd_eval(args: EvalArgs) -> CliResult<()> {
    let instance = Instance::load(&args.instance)?;
    let tables = load_tables(&args.tables)?;
    let mut policies = build_policies(&args.policies, &tables)?;
    let report = evaluate(&instance, &mut policies, args.realizations, args.seed)?;
    let csv = report.to_csv();
    match &args.out {
        Some(path) => {
            std::fs::write(path, &csv)?;
            println!(
                "wrote {} ({} policies x {} realizations, best: {})",
                path.display(),
                report.rows.len(),
                report.realizations,
                report.best
            );
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_inspect(args: InspectArgs) -> CliResult<()> {
    let table = ValueTable::load(&args.table)?;
    println!("file\t{}", args.table.display());
    println!("mode\t{}", table.mode());
    println!("keys\t{}", table.len());
    println!("iterations\t{}", table.iterations());
    if let Some(stamp) = &table.stamp {
        println!(
            "trained\tseed={} prune={} stopped_by_rule={}",
            stamp.seed, stamp.prune, stamp.stopped_by_rule
        );
    }
    let mut entries: Vec<_> = table.iter().collect();
    entries.sort_by(|a, b| b.1.visits.cmp(&a.1.visits).then(a.0.cmp(b.0)));
    for (key, entry) in entries.into_iter().take(args.top) {
        println!("{key}\tvalue={:.6}\tvisits={}", entry.value, entry.visits);
    }
    Ok(())
}

/// One instance of an experiment manifest: everything `gen` needs plus a
/// name that prefixes the artifact files.
#[derive(Deserialize)]
struct ManifestInstance {
    name: String,
    nodes: usize,
    shape: String,
    dims: Vec<f64>,
    #[serde(default = "default_degree")]
    degree: usize,
    #[serde(default)]
    reduce: usize,
    repair_time: f64,
    fault_prob: f64,
    seed: u64,
}

fn default_degree() -> usize {
    3
}

#[derive(Deserialize)]
struct ManifestTrain {
    modes: Vec<String>,
    #[serde(default = "default_true")]
    prune: bool,
    #[serde(default = "default_gamma")]
    gamma: f64,
    seed: u64,
    max_iters: u64,
    #[serde(default = "default_warmup")]
    warmup: u64,
    #[serde(default = "default_batch")]
    batch: u64,
}

fn default_true() -> bool {
    true
}
fn default_gamma() -> f64 {
    0.5
}
fn default_warmup() -> u64 {
    100_000
}
fn default_batch() -> u64 {
    10_000
}

#[derive(Deserialize)]
struct ManifestEval {
    policies: Vec<String>,
    realizations: usize,
    seed: u64,
}

#[derive(Deserialize)]
struct Manifest {
    out_dir: PathBuf,
    instances: Vec<ManifestInstance>,
    train: ManifestTrain,
    eval: ManifestEval,
}

fn cmd_run(args: RunArgs) -> CliResult<()> {
    let text = std::fs::read_to_string(&args.manifest)?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| usage(format!("bad manifest: {e}")))?;

    // Validate everything up front so a half-written run cannot start.
    let mut modes = Vec::new();
    for mode in &manifest.train.modes {
        modes.push(parse_mode(mode)?);
    }
    for name in &manifest.eval.policies {
        let needs_mode = match name.as_str() {
            "ps" | "nn" => None,
            "snrr" => Some(AggregationMode::Full),
            "sa1" => Some(AggregationMode::Sa1),
            "sa2" => Some(AggregationMode::Sa2),
            "sa3" => Some(AggregationMode::Sa3),
            other => return Err(usage(format!("unknown policy '{other}' in manifest"))),
        };
        if let Some(mode) = needs_mode {
            if !modes.contains(&mode) {
                return Err(usage(format!(
                    "policy '{name}' needs mode {mode} in train.modes"
                )));
            }
        }
    }

    std::fs::create_dir_all(&manifest.out_dir)?;
    for entry in &manifest.instances {
        let region = parse_region(&entry.shape, &entry.dims)?;
        let instance = generate(&GenConfig {
            nodes: entry.nodes,
            region,
            degree_bound: entry.degree,
            reduce: entry.reduce,
            repair_time: entry.repair_time,
            fault_prob: entry.fault_prob,
            seed: entry.seed,
        })?;
        let inst_path = manifest
            .out_dir
            .join(format!("{}.instance.json", entry.name));
        instance.save(&inst_path)?;
        println!("gen {} -> {}", entry.name, inst_path.display());

        let config = TrainConfig {
            seed: manifest.train.seed,
            stop_threshold: manifest.train.gamma,
            max_iterations: manifest.train.max_iters,
            warmup_iterations: manifest.train.warmup,
            batch_size: manifest.train.batch,
            ..TrainConfig::default()
        };
        let mut tables = Vec::new();
        for &mode in &modes {
            let table =
                train_with_progress(&instance, &config, mode, manifest.train.prune, |_| {})?;
            let table_path = manifest
                .out_dir
                .join(format!("{}.{}.table.json", entry.name, mode));
            table.save(&table_path)?;
            println!(
                "train {} {} -> {} ({} keys, {} iterations)",
                entry.name,
                mode,
                table_path.display(),
                table.len(),
                table.iterations()
            );
            let policy_name = match mode {
                AggregationMode::Full => "snrr",
                AggregationMode::Sa1 => "sa1",
                AggregationMode::Sa2 => "sa2",
                AggregationMode::Sa3 => "sa3",
            };
            tables.push((policy_name.to_string(), table));
        }

        let mut policies = build_policies(&manifest.eval.policies, &tables)?;
        let report = evaluate(
            &instance,
            &mut policies,
            manifest.eval.realizations,
            manifest.eval.seed,
        )?;
        let csv_path = manifest.out_dir.join(format!("{}.eval.csv", entry.name));
        std::fs::write(&csv_path, report.to_csv())?;
        let mut summary = String::new();
        for row in &report.rows {
            let _ = write!(summary, " {}={:.3}", row.policy, row.mean_total);
        }
        println!(
            "eval {} -> {} (best: {}){summary}",
            entry.name,
            csv_path.display(),
            report.best
        );
    }
    Ok(())
}
