use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lcmanifold::config::{RunConfig, Target};
use lcmanifold::{commands, verify, CliError};

#[derive(Debug, Parser)]
#[command(
    name = "lcmanifold",
    version,
    about = "Limit cycles on quadratic invariant manifolds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration; `-` reads standard input.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Output directory, overriding `output.directory`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// System to integrate for `simulate` and `analyze`.
    #[arg(long, global = true, default_value = "reduced2d")]
    target: Target,

    #[arg(long, global = true)]
    lambda_min: Option<f64>,

    #[arg(long, global = true)]
    lambda_max: Option<f64>,

    #[arg(long, global = true)]
    lambda_steps: Option<usize>,

    /// Trajectory CSV for `analyze` instead of simulating.
    #[arg(long, global = true, value_name = "FILE")]
    trajectory: Option<PathBuf>,

    #[arg(long, global = true, hide = true)]
    debug_doubled_denominator: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Manifold coefficients from the generic solve and the closed form.
    Manifold,
    /// Integrate a trajectory and write it as CSV.
    Simulate,
    /// Measure mean radius, angular velocity and oscillation count.
    Analyze,
    /// Run the numerical checks and print a pass/fail table.
    Verify,
    /// Predicted and simulated radius over a range of λ.
    Sweep,
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(dir) = &cli.out {
        cfg.output.directory = dir.clone();
    }
    if let Some(v) = cli.lambda_min {
        cfg.sweep.lambda_min = v;
    }
    if let Some(v) = cli.lambda_max {
        cfg.sweep.lambda_max = v;
    }
    if let Some(v) = cli.lambda_steps {
        cfg.sweep.lambda_steps = v;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = load(cli)?;
    let text = match cli.command {
        Command::Manifold => commands::run_manifold(&cfg)?,
        Command::Simulate => commands::run_simulate(&cfg, cli.target)?.1,
        Command::Analyze => commands::run_analyze(&cfg, cli.target, cli.trajectory.as_deref())?,
        Command::Sweep => commands::run_sweep(&cfg)?,
        Command::Verify => {
            let opts = verify::Options {
                doubled_denominator: cli.debug_doubled_denominator,
            };
            let (table, status) = verify::run_verify(&cfg, opts)?;
            print!("{table}");
            return status;
        }
    };
    print!("{text}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
