use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use snreorder_cli::{cmd_analyze, cmd_compare, cmd_factor, cmd_reorder, parse_methods, MethodKind, RunConfig};
use snreorder_core::alloc_meter::CountingAlloc;
use snreorder_core::pr::Strategy;
use snreorder_core::tsp::Rule;

#[global_allocator]
static ALLOC: CountingAlloc = CountingAlloc;

/// Supernodal analysis, within-supernode reordering and blocked factorization.
#[derive(Parser)]
#[command(name = "snreorder", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Symbolic analysis and supernode merging.
    Analyze(Common),
    /// Within-supernode reordering and block statistics.
    Reorder(Common),
    /// Blocked numeric factorization and a solve.
    Factor(Common),
    /// Compare reordering methods on a matrix or a directory of matrices.
    Compare(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    None,
    Pr,
    Tsp,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Natural,
    Ndesc,
    Work,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    Arbitrary,
    Nearest,
    Farthest,
}

#[derive(Args)]
struct Common {
    /// Matrix Market file (or directory for compare).
    #[arg(long)]
    input: PathBuf,
    /// Fill-reducing permutation file.
    #[arg(long, conflicts_with = "mdo")]
    perm: Option<PathBuf>,
    /// Compute a minimum-degree fill-reducing order.
    #[arg(long)]
    mdo: bool,
    /// Fraction of extra stored zeros allowed when merging supernodes.
    #[arg(long, default_value_t = snreorder_core::amalgamate::DEFAULT_CAP)]
    merge_cap: f64,
    #[arg(long, value_enum, default_value = "none")]
    method: MethodArg,
    #[arg(long, value_enum, default_value = "work")]
    strategy: StrategyArg,
    #[arg(long, value_enum, default_value = "farthest")]
    rule: RuleArg,
    /// Weight insertion distances by updater widths.
    #[arg(long)]
    weighted: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Timing repetitions for compare (odd; the median is reported).
    #[arg(long, default_value_t = 7)]
    reps: usize,
    /// Comma-separated method names for compare, e.g. FARwts,PR-work.
    #[arg(long)]
    methods: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn config(c: Common) -> anyhow::Result<RunConfig> {
    let mut cfg = RunConfig::new(c.input);
    cfg.perm = c.perm;
    cfg.mdo = c.mdo;
    cfg.merge_cap = c.merge_cap;
    cfg.method = match c.method {
        MethodArg::None => MethodKind::None,
        MethodArg::Pr => MethodKind::Pr,
        MethodArg::Tsp => MethodKind::Tsp,
    };
    cfg.strategy = match c.strategy {
        StrategyArg::Natural => Strategy::Natural,
        StrategyArg::Ndesc => Strategy::Ndesc,
        StrategyArg::Work => Strategy::Work,
    };
    cfg.rule = match c.rule {
        RuleArg::Arbitrary => Rule::Arbitrary,
        RuleArg::Nearest => Rule::Nearest,
        RuleArg::Farthest => Rule::Farthest,
    };
    cfg.weighted = c.weighted;
    cfg.seed = c.seed;
    cfg.reps = c.reps;
    if let Some(list) = c.methods {
        cfg.methods = parse_methods(&list)?;
    }
    cfg.out = c.out;
    Ok(cfg)
}

fn run(cli: Cli) -> anyhow::Result<String> {
    match cli.command {
        Command::Analyze(c) => cmd_analyze(&config(c)?),
        Command::Reorder(c) => cmd_reorder(&config(c)?),
        Command::Factor(c) => cmd_factor(&config(c)?),
        Command::Compare(c) => cmd_compare(&config(c)?),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("SNREORDER_LOG")).init();
    match run(Cli::parse()) {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
