//! `trajhub` command line: generate → preprocess → predict → evaluate → analyze.
//!
//! Exit codes: 0 success, 1 I/O, 2 config or schema, 3 missing predictions.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "trajhub", version, about = "Unified trajectory preprocessing and stratified evaluation")]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    /// Only log errors.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write synthetic scenarios as interchange files.
    Generate(GenerateArgs),
    /// Convert interchange files into a sample cache.
    Preprocess(PreprocessArgs),
    /// Run a baseline predictor over every cache sample.
    Predict(PredictArgs),
    /// Score predictions against a cache.
    Evaluate(EvaluateArgs),
    /// Profile trajectory types and Kalman difficulty of a cache.
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
pub struct GenerateArgs {
    /// Generator config (JSON); defaults apply to omitted fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the config scenario count.
    #[arg(long)]
    pub n_scenarios: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Args)]
pub struct PreprocessArgs {
    /// Directory of `*.jsonl` interchange files.
    #[arg(long)]
    pub input: PathBuf,
    /// Cache directory to create.
    #[arg(long)]
    pub out: PathBuf,
    /// Preprocessing config (JSON); flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// History length, s.
    #[arg(long)]
    pub past: Option<f64>,
    /// Future length, s.
    #[arg(long)]
    pub future: Option<f64>,
    /// Map radius around the focal agent, m.
    #[arg(long)]
    pub map_range: Option<f64>,
    /// Map point spacing, m.
    #[arg(long)]
    pub map_res: Option<f64>,
    /// Points per map chunk.
    #[arg(long)]
    pub points_per_chunk: Option<usize>,
    #[arg(long)]
    pub max_neighbors: Option<usize>,
    /// Comma-separated feature attributes to zero, e.g. `heading,velocity`.
    #[arg(long, value_delimiter = ',')]
    pub mask: Vec<String>,
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Log and skip unreadable scenarios instead of failing.
    #[arg(long)]
    pub skip_bad: bool,
}

#[derive(Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub cache: PathBuf,
    /// `cv` or `kalman`.
    #[arg(long)]
    pub model: String,
    /// Number of modes.
    #[arg(short = 'k', long = "modes", default_value_t = 6)]
    pub modes: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub cache: PathBuf,
    #[arg(long)]
    pub predictions: PathBuf,
    /// Machine-readable report (JSON); the table goes next to it as `.txt`.
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated stratifications: `type`, `kalman`.
    #[arg(long, value_delimiter = ',', default_value = "type,kalman")]
    pub strata: Vec<String>,
    /// `decade`, `paper-main`, `paper-appendix` or `custom:e1,e2,…`.
    #[arg(long, default_value = "paper-main")]
    pub kalman_bins: String,
    /// Score the predicted subset and report coverage instead of failing.
    #[arg(long)]
    pub allow_missing: bool,
    /// Preprocessing config (JSON) the cache must have been built with.
    #[arg(long)]
    pub expect_config: Option<PathBuf>,
    #[arg(long, default_value_t = 2.0)]
    pub miss_threshold: f64,
    /// Mode whose probability enters brier-minFDE: `fde` or `ade`.
    #[arg(long, default_value = "fde")]
    pub best_mode: String,
    #[arg(long, default_value_t = 6)]
    pub max_modes: usize,
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub cache: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "decade")]
    pub kalman_bins: String,
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => log::LevelFilter::Error,
        (false, 0) => log::LevelFilter::Warn,
        (false, 1) => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_env("TRAJHUB_LOG")
        .target(env_logger::Target::Stderr)
        .init();

    let result = match cli.command {
        Command::Generate(a) => commands::generate(a),
        Command::Preprocess(a) => commands::preprocess(a),
        Command::Predict(a) => commands::predict(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Analyze(a) => commands::analyze(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
