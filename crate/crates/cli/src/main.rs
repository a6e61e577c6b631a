use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use vfl_cli::config::Config;
use vfl_cli::error::CliError;
use vfl_cli::experiments;

/// Deterministic two-party vertical federated learning simulator with
/// privacy attack experiments.
#[derive(Parser)]
#[command(name = "vfl", version, about)]
struct Cli {
    /// Key-value configuration file (dotted sections).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed; overrides `seed` from the configuration file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for datasets, transcripts, and metrics.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset CSV.
    Gen,
    /// Run secure logistic regression; writes the transcript, the model,
    /// and the coordinator key material.
    TrainLogreg,
    /// Reverse multiplication attack on a recorded transcript.
    AttackRevmul,
    /// Run SecureBoost; writes the model and the per-node histograms.
    TrainSboost,
    /// Reverse sum attack: encode magic numbers, train, reverse the bins.
    AttackRevsum,
    /// Infer per-bin value bounds from auxiliary samples.
    Binmap,
    /// Train the alternative classifier on leaked bins and compare it with
    /// the original model.
    AltModel,
    /// Run a sweep grid (`sweep.kind` selects the experiment).
    Sweep,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.set("seed", seed);
    }
    let seed = cfg.u64("seed", 7)?;
    std::fs::create_dir_all(&cli.out)?;
    let out = cli.out.as_path();
    match cli.command {
        Command::Gen => {
            let path = experiments::cmd_gen(&cfg, seed, out)?;
            println!("wrote {}", path.display());
        }
        Command::TrainLogreg => experiments::cmd_train_logreg(&cfg, seed, out)?,
        Command::AttackRevmul => experiments::cmd_attack_revmul(&cfg, seed, out)?,
        Command::TrainSboost => experiments::cmd_train_sboost(&cfg, seed, out)?,
        Command::AttackRevsum => experiments::cmd_attack_revsum(&cfg, seed, out)?,
        Command::Binmap => experiments::cmd_binmap(&cfg, seed, out)?,
        Command::AltModel => experiments::cmd_alt_model(&cfg, seed, out)?,
        Command::Sweep => {
            let path = experiments::cmd_sweep(&cfg, seed, out)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
