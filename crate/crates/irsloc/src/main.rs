use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use irsloc::commands::{self, FieldOptions, Overrides};
use irsloc::gradcheck::GRAD_TOLERANCE;
use irsloc::{output, Execution};

/// UAV-IRS near-field localization simulator.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo comparison of the four schemes.
    Simulate(SimulateArgs),
    /// Compare the analytic SNR gradient with finite differences.
    CheckGrad(CheckGradArgs),
    /// Export one trial's likelihood field as CSV.
    Field(FieldArgs),
    /// Print the default configuration as JSON.
    DefaultConfig,
}

#[derive(Args)]
struct Common {
    /// JSON config; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base seed (trial m uses seed + m).
    #[arg(long)]
    seed: Option<u64>,
    /// Evaluate on the calling thread only.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    /// Output directory for trials.csv, summary.json and trace.csv.
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated transmit powers in dBm.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    powers: Option<Vec<f64>>,
    /// Trials per power.
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated schemes: joint, phase-only, position-only, baseline or a..d.
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<String>>,
    /// Rough-estimate on a coarse grid.
    #[arg(long)]
    coarse_rough_grid: bool,
}

#[derive(Args)]
struct CheckGradArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 20)]
    points: usize,
    /// Central-difference step in meters.
    #[arg(long, default_value_t = 1e-7)]
    fd_step: f64,
    #[arg(long, default_value_t = 35.0, allow_negative_numbers = true)]
    power: f64,
}

#[derive(Args)]
struct FieldArgs {
    #[command(flatten)]
    common: Common,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 35.0, allow_negative_numbers = true)]
    power: f64,
    #[arg(long, default_value_t = 0)]
    trial: u64,
    /// Sample the pilot without noise.
    #[arg(long)]
    noiseless: bool,
}

fn execution(c: &Common) -> Execution {
    if c.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate(a) => {
            let overrides = Overrides {
                seed: a.common.seed,
                powers_dbm: a.powers,
                trials: a.trials,
                schemes: a.schemes,
                coarse_rough_grid: a.coarse_rough_grid,
            };
            let config = commands::load_config(a.common.config.as_deref(), &overrides).context("loading config")?;
            let outcome = commands::simulate(&config, &a.out, execution(&a.common))?;
            print!("{}", output::summary_table(&outcome.report));
            println!("wrote {}", outcome.trials_csv.display());
            println!("wrote {}", outcome.summary_json.display());
            if let Some(p) = outcome.trace_csv {
                println!("wrote {}", p.display());
            }
            Ok(true)
        }
        Command::CheckGrad(a) => {
            let config = commands::load_config(a.common.config.as_deref(), &Overrides::default())
                .context("loading config")?;
            let seed = a.common.seed.unwrap_or(config.plan.base_seed);
            let report = commands::check_grad(&config, a.points, a.fd_step, seed, a.power)?;
            for (i, p) in report.points.iter().enumerate() {
                println!(
                    "point {i:>3}  uav [{:.4}, {:.4}, {:.4}]  max rel error {:.3e}",
                    p.uav.x,
                    p.uav.y,
                    p.uav.z,
                    p.max_error()
                );
            }
            println!("max relative error        {:.3e}", report.max_rel_error());
            println!("max plain-difference error {:.3e}", report.max_plain_rel_error());
            println!("tolerance                 {GRAD_TOLERANCE:.0e}");
            Ok(report.passed())
        }
        Command::Field(a) => {
            let overrides = Overrides {
                seed: a.common.seed,
                ..Overrides::default()
            };
            let config = commands::load_config(a.common.config.as_deref(), &overrides).context("loading config")?;
            let opts = FieldOptions {
                tx_power_dbm: a.power,
                trial_index: a.trial,
                noiseless: a.noiseless,
            };
            let field = commands::field(&config, &a.out, opts, execution(&a.common))?;
            let e = field.estimate;
            println!("estimate [{}, {}, {}]  L = {}", e.x, e.y, e.z, field.min_value());
            println!("wrote {} ({} rows)", a.out.display(), field.values.len());
            Ok(true)
        }
        Command::DefaultConfig => {
            println!("{}", irsloc::ExperimentConfig::default().to_json());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("gradient check failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
