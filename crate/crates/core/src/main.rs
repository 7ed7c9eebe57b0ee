use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sphirf::commands::{run_curves, run_fit, run_mom, run_select_order, run_simulate};
use sphirf::config::{Overrides, ResolvedConfig};

/// Simulate, estimate and select the order of intrinsic random fields on the sphere over time.
#[derive(Parser)]
#[command(name = "sphirf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact simulation on a location x time grid.
    Simulate(Common),
    /// Truncate, difference, estimate moments and fit (alpha, beta, gamma0).
    Fit(Common),
    /// Binned method-of-moments table only.
    Mom(Common),
    /// Criterion M(n) and the selected spatial order.
    SelectOrder(Common),
    /// Theoretical covariance curves for plotting.
    Curves(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    kappa: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Input field CSV.
    #[arg(long)]
    input: Option<PathBuf>,
}

type Runner = fn(&ResolvedConfig) -> sphirf::Result<Vec<PathBuf>>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, run): (&Common, Runner) = match &cli.command {
        Command::Simulate(c) => (c, run_simulate),
        Command::Fit(c) => (c, run_fit),
        Command::Mom(c) => (c, run_mom),
        Command::SelectOrder(c) => (c, run_select_order),
        Command::Curves(c) => (c, run_curves),
    };
    let overrides = Overrides {
        seed: common.seed,
        kappa: common.kappa,
        d: common.d,
        out: common.out.clone(),
        input: common.input.clone(),
    };
    let result = ResolvedConfig::load(common.config.as_deref(), &overrides).and_then(|cfg| run(&cfg));
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
