use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use levy_krylov_cli::commands::{self, write_summary, SummaryRow};
use levy_krylov_cli::config::ExperimentConfig;

/// Existence conditions, sampling, occupation estimates and mollification
/// ladders for Lévy-driven SDEs with bounded drift.
#[derive(Parser)]
#[command(name = "levy-krylov", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the growth condition on Re psi and report lambda0 and N1.
    CheckPsi(Common),
    /// Sample Lévy and solution paths and check the empirical characteristic function.
    Sample(Common),
    /// Monte Carlo occupation estimates against the L2 bound.
    Krylov(Common),
    /// Fourier resolvent of the driftless process, optionally cross-checked.
    Resolvent(Common),
    /// Mollification ladder under coupled noise.
    Converge(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Dotted override, e.g. `model.nu.alpha=1.2`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed (overrides `seed`).
    #[arg(long)]
    seed: Option<u64>,
}

fn load(common: &Common) -> Result<ExperimentConfig, commands::AppError> {
    let mut cfg = ExperimentConfig::load(&common.config)?.with_overrides(&common.overrides)?;
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, run): (&Common, fn(&ExperimentConfig) -> Result<Vec<SummaryRow>, commands::AppError>) =
        match &cli.command {
            Command::CheckPsi(c) => (c, commands::check_psi),
            Command::Sample(c) => (c, commands::sample),
            Command::Krylov(c) => (c, commands::krylov),
            Command::Resolvent(c) => (c, commands::resolvent),
            Command::Converge(c) => (c, commands::converge),
        };
    let result = load(common).and_then(|cfg| {
        let rows = run(&cfg)?;
        write_summary(&rows, &cfg.output_dir)?;
        Ok(rows)
    });
    match result {
        Ok(rows) => {
            for r in &rows {
                println!("{} {}", r.verdict, r.experiment_id);
            }
            if rows.iter().any(SummaryRow::is_failure) {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
