use std::path::PathBuf;
use std::process::ExitCode;

use adaptnet_cli::{bounds, converge, simulate, verify, CliError, Overrides, RunConfig, EXIT_CHECK_FAILED, EXIT_PASS};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "adaptnet", version, about = "Adaptive Kuramoto network simulations and verification studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one resolution and write trajectory, order parameter and positivity reports.
    Simulate(Run),
    /// Self-convergence study over numerics.ns against numerics.n_ref.
    Converge(Run),
    /// Compare RK4 with the Picard solver and the integrating-factor weights.
    Verify(Run),
    /// Print positivity, horizon and continuous-dependence constants.
    Bounds(Run),
}

#[derive(Args)]
struct Run {
    /// TOML configuration file.
    config: PathBuf,
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated study sizes.
    #[arg(long, value_delimiter = ',')]
    ns: Option<Vec<usize>>,
    #[arg(long)]
    n_ref: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    dt_ref: Option<f64>,
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Length T of the time window.
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Include or omit the weight columns of the trajectory CSV.
    #[arg(long)]
    weights: Option<bool>,
    /// Write phases reduced to [0, 2π).
    #[arg(long)]
    wrap_phases: Option<bool>,
}

impl Run {
    fn overrides(&self) -> Overrides {
        Overrides {
            n: self.n,
            ns: self.ns.clone(),
            n_ref: self.n_ref,
            dt: self.dt,
            dt_ref: self.dt_ref,
            stride: self.stride,
            epsilon: self.epsilon,
            horizon: self.horizon,
            out_dir: self.out_dir.clone(),
            weights: self.weights,
            wrap_phases: self.wrap_phases,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (run, action): (&Run, fn(&RunConfig) -> Result<_, CliError>) = match &cli.command {
        Command::Simulate(r) => (r, simulate),
        Command::Converge(r) => (r, converge),
        Command::Verify(r) => (r, verify),
        Command::Bounds(r) => (r, bounds),
    };
    let result = RunConfig::load(&run.config, &run.overrides()).and_then(|cfg| action(&cfg));
    match result {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if outcome.passed {
                ExitCode::from(EXIT_PASS)
            } else {
                eprintln!("check failed");
                ExitCode::from(EXIT_CHECK_FAILED)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Core(adaptnet::Error::AssumptionsFailed(report)) = &e {
                for c in report.checks.iter().filter(|c| !c.passed) {
                    eprintln!("  {}: margin {:.6e}, {}", c.id, c.margin, c.detail);
                }
            }
            ExitCode::from(e.exit_code())
        }
    }
}
