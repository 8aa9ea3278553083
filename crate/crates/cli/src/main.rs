use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use grasp_core::baselines::Baseline;
use grasp_core::graph::{ArgumentId, DefenseMode, WeightedInteractionGraph};
use grasp_core::io::{self, LoadedDebate, LoadedSource, SourceData};
use grasp_core::operator::GraspConfig;
use grasp_core::pipeline::{self, RankMethod, SweepGrid, Variant};
use grasp_core::testbed::{MethodSpec, SuiteConfig};
use grasp_core::GraspError;

mod text;

#[derive(Parser)]
#[command(name = "grasp", version, about = "Attack-defense strength propagation over argument graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rank the arguments of one graph.
    Rank {
        /// Graph document (.json) or pairwise score stream (.jsonl).
        input: PathBuf,
        #[command(flatten)]
        method: MethodArgs,
        /// Also write the per-iteration trace here.
        #[arg(long)]
        trajectory: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Per-iteration scores and ranks of the propagation.
    Trajectory {
        input: PathBuf,
        #[command(flatten)]
        method: MethodArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Scores from every baseline.
    Baselines {
        input: PathBuf,
        #[arg(long, value_parser = parse_defense)]
        defense_mode: Option<DefenseMode>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Density, mean weight, norms and centrality alignment.
    Stats {
        input: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        #[arg(long, value_parser = parse_defense)]
        defense_mode: Option<DefenseMode>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Critical-ranking-condition violation rates on generated graphs.
    Testbed {
        /// Suite configuration; the standard suite when absent.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Method names (`grasp`, `grasp:<defense_mode>`, or a baseline);
        /// replaces the suite's method list.
        #[arg(long = "method", value_delimiter = ',')]
        methods: Vec<String>,
        #[arg(long, env = "GRASP_SEED", default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Pairwise agreement between sources, averaged across debates.
    Agree {
        #[command(flatten)]
        sources: SourceArgs,
        #[command(flatten)]
        method: MethodArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Borda and greedy Kemeny consensus and each source's distance to it.
    Consensus {
        #[command(flatten)]
        sources: SourceArgs,
        #[command(flatten)]
        method: MethodArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Grid search over (alpha, beta, gamma) scored by cross-source agreement.
    Sweep {
        #[command(flatten)]
        sources: SourceArgs,
        /// Grid file; the 4 × 4 × 4 grid when absent.
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long, default_value = "grasp", value_parser = parse_variant)]
        variant: Variant,
        #[arg(long, value_parser = parse_defense)]
        defense_mode: Option<DefenseMode>,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Convert a pairwise score stream into a graph document.
    Ingest {
        input: PathBuf,
        /// Argument order; inferred from the records when absent.
        #[arg(long, value_delimiter = ',')]
        arguments: Vec<String>,
        #[arg(long, value_parser = parse_defense)]
        defense_mode: Option<DefenseMode>,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args)]
struct MethodArgs {
    /// `grasp` or a baseline name.
    #[arg(long, default_value = "grasp")]
    method: String,
    #[arg(long, default_value = "grasp", value_parser = parse_variant)]
    variant: Variant,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Katz damping factor.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, value_parser = parse_defense)]
    defense_mode: Option<DefenseMode>,
}

#[derive(Args)]
struct SourceArgs {
    /// Debate manifest.
    #[arg(long, conflicts_with = "files")]
    manifest: Option<PathBuf>,
    /// Source files forming a single debate.
    #[arg(required_unless_present = "manifest")]
    files: Vec<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct OutArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse().map_err(|e: GraspError| e.to_string())
}

fn parse_defense(s: &str) -> Result<DefenseMode, String> {
    s.parse().map_err(|e: GraspError| e.to_string())
}

enum Failure {
    Core(GraspError),
    Usage(String),
}

impl From<GraspError> for Failure {
    fn from(e: GraspError) -> Self {
        Failure::Core(e)
    }
}

type CliResult<T = ()> = Result<T, Failure>;

/// 2 usage, 3 I/O, 4 malformed input, 5 invalid graph, 6 ranking mismatch,
/// 7 numerical failure.
fn exit_code(e: &GraspError) -> u8 {
    use GraspError::*;
    match e {
        InvalidConfig(_) => 2,
        Io { .. } => 3,
        Format(_) | MalformedRecord { .. } | ScoreOutOfRange { .. } | DuplicatePair { .. } | DuplicateEdge { .. }
        | UnknownArgument(_) | UnknownArgumentAt { .. } => 4,
        NegativeWeight { .. } | WeightAboveOne { .. } | NonFiniteWeight { .. } | NonSquareMatrix { .. }
        | DuplicateArgumentId(_) | EmptyArgumentId | DimensionMismatch { .. } => 5,
        MismatchedItems(_) | KTooLarge { .. } | TooLarge { .. } => 6,
        NonConvergence { .. } | SingularSystem(_) | NonFiniteInput(_) => 7,
    }
}

impl MethodArgs {
    fn resolve(&self) -> CliResult<RankMethod> {
        if self.method != "grasp" {
            let mut kind: Baseline = self.method.parse()?;
            if let Baseline::KatzAttack { lambda } = &mut kind {
                *lambda = self.lambda;
            }
            return Ok(RankMethod::Baseline(kind));
        }
        let mut config = GraspConfig::default();
        config.alpha = self.alpha.unwrap_or(config.alpha);
        config.beta = self.beta.unwrap_or(config.beta);
        config.gamma = self.gamma.unwrap_or(config.gamma);
        config.tol = self.tol.unwrap_or(config.tol);
        config.max_iters = self.max_iters.unwrap_or(config.max_iters);
        Ok(RankMethod::Grasp { variant: self.variant, config })
    }
}

impl OutArgs {
    fn emit(&self, json: String, text: impl FnOnce() -> String) -> CliResult {
        let body = match self.format {
            Format::Json => json,
            Format::Text => text(),
        };
        match &self.out {
            Some(path) => io::write_text(path, &body)?,
            None => print!("{body}"),
        }
        Ok(())
    }
}

fn load_graph(path: &Path, mode: Option<DefenseMode>) -> CliResult<WeightedInteractionGraph> {
    match io::load_source(path, None, mode.unwrap_or_default())? {
        SourceData::Graph(g) => Ok(g),
        SourceData::Ranking(_) => Err(Failure::Usage(format!("{} is a ranking, not a graph", path.display()))),
    }
}

fn load_debates(args: &SourceArgs, mode: Option<DefenseMode>) -> CliResult<Vec<LoadedDebate>> {
    if let Some(m) = &args.manifest {
        return Ok(io::load_manifest(m)?);
    }
    if args.files.len() < 2 {
        return Err(Failure::Usage("at least two source files are required".into()));
    }
    let sources = args
        .files
        .iter()
        .map(|p| {
            let label = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let data = io::load_source(p, None, mode.unwrap_or_default())?;
            Ok(LoadedSource { label, data })
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(vec![LoadedDebate { id: "debate".into(), sources }])
}

fn testbed_method(name: &str) -> CliResult<MethodSpec> {
    if name == "grasp" {
        return Ok(MethodSpec::grasp(DefenseMode::WSquared));
    }
    if let Some(mode) = name.strip_prefix("grasp:") {
        return Ok(MethodSpec::grasp(mode.parse()?));
    }
    Ok(MethodSpec::baseline(name.parse()?))
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Rank { input, method, trajectory, out } => {
            let g = load_graph(&input, None)?;
            let m = method.resolve()?;
            let result = pipeline::rank(&g, &m, method.defense_mode, trajectory.is_some())?;
            if result.report.converged == Some(false) {
                eprintln!("warning: iteration budget exhausted before convergence");
            }
            if let (Some(path), Some(trace)) = (&trajectory, &result.trace) {
                io::write_text(path, &io::to_json(trace)?)?;
            }
            let json = io::to_json(&result.report)?;
            out.emit(json, || text::ranking(&result.report))
        }
        Command::Trajectory { input, method, out } => {
            let g = load_graph(&input, None)?;
            let m @ RankMethod::Grasp { .. } = method.resolve()? else {
                return Err(Failure::Usage("trajectory is only defined for grasp".into()));
            };
            let result = pipeline::rank(&g, &m, method.defense_mode, true)?;
            let trace = result.trace.expect("trace requested");
            let json = io::to_json(&trace)?;
            out.emit(json, || text::trace(&trace))
        }
        Command::Baselines { input, defense_mode, out } => {
            let g = load_graph(&input, defense_mode)?;
            let reports = pipeline::all_baselines(&g)?;
            let json = io::to_json(&reports)?;
            out.emit(json, || text::baselines(g.arguments(), &reports))
        }
        Command::Stats { input, threshold, defense_mode, out } => {
            let g = load_graph(&input, defense_mode)?;
            let json = io::to_json(&pipeline::stats(&g, threshold)?)?;
            let fallback = json.clone();
            out.emit(json, || fallback)
        }
        Command::Testbed { config, methods, seed, out } => {
            let mut suite = match &config {
                Some(path) => serde_json::from_str::<SuiteConfig>(&io::read_text(path)?)
                    .map_err(|e| GraspError::Format(format!("{}: {e}", path.display())))?,
                None => SuiteConfig::standard(),
            };
            if !methods.is_empty() {
                suite.methods = methods.iter().map(|m| testbed_method(m)).collect::<CliResult<_>>()?;
            }
            if suite.methods.is_empty() {
                return Err(Failure::Usage("testbed needs at least one method".into()));
            }
            let table = pipeline::testbed(&suite, seed)?;
            let json = io::to_json(&table)?;
            out.emit(json, || table.to_text())
        }
        Command::Agree { sources, method, out } => {
            let debates = load_debates(&sources, method.defense_mode)?;
            let report = pipeline::agree(&debates, &method.resolve()?, method.defense_mode)?;
            let json = io::to_json(&report)?;
            out.emit(json, || text::agreement(&report))
        }
        Command::Consensus { sources, method, out } => {
            let debates = load_debates(&sources, method.defense_mode)?;
            let report = pipeline::consensus(&debates, &method.resolve()?, method.defense_mode)?;
            let json = io::to_json(&report)?;
            out.emit(json, || text::consensus(&report))
        }
        Command::Sweep { sources, grid, variant, defense_mode, max_iters, tol, out } => {
            let debates = load_debates(&sources, defense_mode)?;
            let mut grid = match &grid {
                Some(path) => serde_json::from_str::<SweepGrid>(&io::read_text(path)?)
                    .map_err(|e| GraspError::Format(format!("{}: {e}", path.display())))?,
                None => SweepGrid::default(),
            };
            grid.max_iters = max_iters.unwrap_or(grid.max_iters);
            grid.tol = tol.unwrap_or(grid.tol);
            let report = pipeline::sweep(&debates, &grid, variant, defense_mode)?;
            let json = io::to_json(&report)?;
            out.emit(json, || report.to_text())
        }
        Command::Ingest { input, arguments, defense_mode, out } => {
            let args = arguments.iter().map(|a| ArgumentId::new(a.as_str())).collect::<Result<Vec<_>, _>>()?;
            let args = (!args.is_empty()).then_some(args.as_slice());
            let ingest = io::read_pairwise(&input, args, defense_mode.unwrap_or_default())?;
            if ingest.self_pairs_dropped > 0 {
                eprintln!("warning: dropped {} self-pair record(s)", ingest.self_pairs_dropped);
            }
            let json = io::graph_to_string(&ingest.graph)?;
            let fallback = json.clone();
            out.emit(json, || fallback)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
