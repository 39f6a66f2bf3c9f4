//! `dualstream`: generate, train, calibrate, score, analyze, bench.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dualstream_cli::commands::{
    cmd_analyze, cmd_bench, cmd_calibrate, cmd_generate, cmd_score, cmd_train, AnalyzeArgs,
    BenchArgs, CalibrateArgs, Ctx, GenerateArgs, ScoreArgs, TrainArgs,
};
use dualstream_cli::{config, CliError};

#[derive(Parser)]
#[command(
    name = "dualstream",
    version,
    about = "Dual-stream vehicle health monitoring: an autoencoder stream for the unexpected, a physics stream for the expensive-but-expected"
)]
struct Cli {
    /// Seed for every stochastic step: generation, splits, weight init.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// key=value run configuration file (masses, training, thresholds).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for generated files.
    #[arg(long, global = true, default_value = ".")]
    output_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic mission telemetry (single mission or grid corpus).
    Generate(GenerateArgs),
    /// Train the autoencoder on the Normal windows of a corpus.
    Train(TrainArgs),
    /// Fit per-channel min-max scales on a calibration corpus.
    Calibrate(CalibrateArgs),
    /// Score telemetry into fused per-window health vectors.
    Score(ScoreArgs),
    /// Correlation and rank-test reports over a scored, labeled corpus.
    Analyze(AnalyzeArgs),
    /// Single-threaded per-window latency of each stream (no energy).
    Bench(BenchArgs),
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let ctx = Ctx {
        seed: cli.seed,
        config: config::load(cli.config.as_deref())?,
        output_dir: cli.output_dir.clone(),
    };
    match &cli.command {
        Command::Generate(args) => cmd_generate(&ctx, args),
        Command::Train(args) => cmd_train(&ctx, args),
        Command::Calibrate(args) => cmd_calibrate(&ctx, args),
        Command::Score(args) => cmd_score(&ctx, args),
        Command::Analyze(args) => cmd_analyze(&ctx, args),
        Command::Bench(args) => cmd_bench(&ctx, args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err);
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
