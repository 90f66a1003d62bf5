//! `paperrank`: rank submissions from referee scores and benchmark the rankers.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use paperrank_core::eval::MethodKind;
use paperrank_core::prefs::PairFilter;

const EXIT_VALIDATION: u8 = 2;
const EXIT_COMPUTATION: u8 = 3;

#[derive(Parser)]
#[command(name = "paperrank", version, about = "Rank peer-reviewed papers from referee scores")]
struct Cli {
    /// Worker threads for the parallel stages; 0 uses every core.
    #[arg(long, global = true, env = "PAPERRANK_THREADS", default_value_t = 0)]
    threads: usize,

    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct DataArgs {
    /// Reviews, one JSON object per line.
    #[arg(long)]
    pub reviews: PathBuf,
    /// Papers, one JSON object per line.
    #[arg(long)]
    pub papers: PathBuf,
    /// Score scales as JSON; the ACL-2018 scales if omitted.
    #[arg(long)]
    pub scale: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureChoice {
    AcceptOpt,
    CiteOpt,
    ScoreOnly,
    Custom(PathBuf),
}

fn parse_feature_choice(s: &str) -> Result<FeatureChoice, String> {
    match s {
        "accept-opt" => Ok(FeatureChoice::AcceptOpt),
        "cite-opt" => Ok(FeatureChoice::CiteOpt),
        "score-only" => Ok(FeatureChoice::ScoreOnly),
        _ => match s.strip_prefix("custom:") {
            Some(path) if !path.is_empty() => Ok(FeatureChoice::Custom(PathBuf::from(path))),
            _ => Err(format!(
                "expected accept-opt, cite-opt, score-only or custom:<file>, got `{s}`"
            )),
        },
    }
}

#[derive(Args, Debug)]
pub struct RankArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// gppl, dcon, ncon, mean-s-w, median-s or major-s.
    #[arg(long)]
    pub method: MethodKind,
    /// Text-feature CSV, needed by feature configs with text blocks.
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// accept-opt, cite-opt, score-only or custom:<file>.
    #[arg(long, value_parser = parse_feature_choice, default_value = "accept-opt")]
    pub feature_config: FeatureChoice,
    /// GPPL settings as JSON.
    #[arg(long)]
    pub gppl_config: Option<PathBuf>,
    /// Wall-clock budget of the consensus solvers, in seconds.
    #[arg(long)]
    pub time_budget: Option<f64>,
    /// Weight of reviews without a confidence value (mean-s-w).
    #[arg(long, default_value_t = 1.0)]
    pub missing_confidence_weight: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Ranking CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Also save the fitted GPPL model as JSON.
    #[arg(long)]
    pub save_model: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a dataset, print its statistics and the referees' agreement.
    Ingest {
        #[command(flatten)]
        data: DataArgs,
        /// Also write the summary as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the preference pairs implied by each referee's scores.
    Pairs {
        #[command(flatten)]
        data: DataArgs,
        /// keep-all, drop-ties or drop-cross-track.
        #[arg(long, default_value = "keep-all")]
        filter: PairFilter,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank every paper with one method.
    Rank(RankArgs),
    /// Run a benchmark scenario and write the evaluation report.
    Benchmark {
        #[command(flatten)]
        data: DataArgs,
        /// Scenario JSON: methods, perturbations, runs, seed.
        #[arg(long)]
        scenario: PathBuf,
        /// Text-feature CSV used for every scenario.
        #[arg(long)]
        features: Option<PathBuf>,
        /// Latent utilities of a synthetic dataset (JSON map); enables
        /// rho_truth and regenerates text features per perturbed dataset.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Overrides the scenario's run count.
        #[arg(long)]
        runs: Option<usize>,
        /// Overrides the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Report JSON.
        #[arg(long)]
        out: PathBuf,
        /// Also write a mean/sd table as CSV.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Draw the efficiency curve of a report as SVG.
    Plot {
        #[arg(long)]
        report: PathBuf,
        #[arg(long, default_value = "auroc")]
        left: String,
        #[arg(long, default_value = "rho_norm")]
        right: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic dataset with known utilities and text features.
    Synth {
        /// Generator settings as JSON.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Check a text-feature CSV against the column schema.
    ValidateText {
        #[arg(long)]
        features: PathBuf,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()?;
    }
    match &cli.command {
        Command::Ingest { data, out } => commands::ingest(data, out.as_deref()),
        Command::Pairs { data, filter, out } => commands::pairs(data, *filter, out),
        Command::Rank(args) => commands::rank(args),
        Command::Benchmark { data, scenario, features, truth, runs, seed, out, table } => {
            commands::benchmark(commands::BenchmarkArgs {
                data,
                scenario,
                features: features.as_deref(),
                truth: truth.as_deref(),
                runs: *runs,
                seed: *seed,
                out,
                table: table.as_deref(),
            })
        }
        Command::Plot { report, left, right, out } => commands::plot(report, left, right, out),
        Command::Synth { config, seed, out_dir } => commands::synth(config.as_deref(), *seed, out_dir),
        Command::ValidateText { features } => commands::validate_text(features),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<paperrank_core::Error>() {
        Some(e) if !e.is_validation() => EXIT_COMPUTATION,
        _ => EXIT_VALIDATION,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
