//! `ctd`: score paper-level novelty as traversal distance over historical
//! knowledge networks, and validate the scores against labels.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ctd_core::eval::MatchKey;
use ctd_core::pairdist::DistanceMethod;

use config::{FlagOverrides, RunConfig};

#[derive(Parser)]
#[command(
    name = "ctd",
    version,
    about = "Novelty scoring over historical term co-occurrence networks"
)]
struct Cli {
    /// TOML config file; command-line flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Corpus of line-delimited JSON paper records.
    #[arg(long, global = true, value_name = "FILE")]
    corpus: Option<PathBuf>,

    /// Historical window length in years.
    #[arg(long, global = true, value_name = "YEARS")]
    window: Option<u32>,

    /// Distance method; repeat the flag to request several.
    #[arg(long = "method", global = true, value_name = "NAME")]
    method: Vec<DistanceMethod>,

    /// Largest focal term count solved exactly.
    #[arg(long, global = true, value_name = "N")]
    exact_threshold: Option<usize>,

    /// Master seed for every random choice in the run.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Output file, or directory for commands that write several files.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Worker threads; 0 or omitted means one per available core.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,

    /// Rebuild artifacts even when a cached file exists.
    #[arg(long, global = true)]
    force: bool,

    /// Matching and estimation repetitions for eval.
    #[arg(long, global = true, value_name = "N")]
    runs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build and cache one historical network per focal year.
    BuildNet,
    /// Train and save term embeddings per focal year.
    Embed,
    /// Score every eligible paper under the requested methods.
    Score {
        /// Line-delimited JSON with explicit distance matrices per paper id,
        /// for worked examples whose distances are given rather than computed.
        #[arg(long, value_name = "FILE")]
        matrix_override: Option<PathBuf>,
    },
    /// Per-year term-count and edge-class tables.
    Stats,
    /// Draw one matched control per labeled case.
    Match {
        /// Match key; repeat for several (default: year, venue, field).
        #[arg(long = "key", value_name = "NAME")]
        keys: Vec<MatchKey>,
    },
    /// Validate a score file: repeated matching, probit fits, and AUC.
    Eval {
        /// Score CSV produced by `ctd score`.
        #[arg(long, value_name = "FILE")]
        scores: PathBuf,

        /// Match key; repeat for several (default: year, venue, field).
        #[arg(long = "key", value_name = "NAME")]
        keys: Vec<MatchKey>,

        /// Standardize scores within each matched sample before fitting.
        #[arg(long)]
        zscore: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(failures) if failures == 0 => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<usize> {
    let keys = match &cli.command {
        Command::Match { keys } => keys.clone(),
        Command::Eval { keys, .. } => keys.clone(),
        _ => Vec::new(),
    };
    let flags = FlagOverrides {
        corpus: cli.corpus,
        out: cli.out,
        window: cli.window,
        methods: cli.method,
        exact_threshold: cli.exact_threshold,
        seed: cli.seed,
        workers: cli.workers,
        runs: cli.runs,
        keys,
        zscore: matches!(&cli.command, Command::Eval { zscore: true, .. }),
    };
    let cfg = RunConfig::resolve(cli.config.as_deref(), flags)?;

    // All parallel work runs in a pool of the configured size so that
    // `--workers` is honored regardless of environment.
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()?;
    pool.install(|| match &cli.command {
        Command::BuildNet => commands::build_net(&cfg, cli.force),
        Command::Embed => commands::embed(&cfg, cli.force),
        Command::Score { matrix_override } => commands::score(&cfg, matrix_override.as_deref()),
        Command::Stats => commands::stats(&cfg),
        Command::Match { .. } => commands::draw_matches(&cfg),
        Command::Eval { scores, .. } => commands::eval(&cfg, scores),
    })
}
