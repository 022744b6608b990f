//! `equitoll`: one subcommand per pipeline stage.

mod commands;
mod inputs;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use equitoll::equilibrium::SolverOptions;
use equitoll::toll_design::{Scheme, DEFAULT_LAMBDA};

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NON_CONVERGENCE: u8 = 3;
pub const EXIT_LP: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "equitoll", version, about = "Multi-class traffic equilibrium and equity-aware toll design")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the equilibrium under optional tolls.
    Equilibrium(commands::EquilibriumArgs),
    /// Design tolls with one of the four schemes.
    Design(commands::DesignArgs),
    /// Fit BPR latencies from sensor data and, optionally, calibrate demand.
    Calibrate(commands::CalibrateArgs),
    /// Grid-search the VOT vector that best reproduces observed flows.
    EstimateVot(commands::EstimateVotArgs),
    /// Report equity, welfare, revenue, PoA and threshold tables for tolls.
    Evaluate(commands::EvaluateArgs),
    /// Sample weighted optima and filter the time/equity Pareto front.
    Pareto(commands::ParetoArgs),
}

/// Network, types and demand shared by most commands.
#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Network JSON.
    #[arg(long)]
    pub network: PathBuf,
    /// VOT CSV (`type,vot`).
    #[arg(long)]
    pub vot: PathBuf,
    /// Demand CSV (`type,origin,destination,demand[,day]`).
    #[arg(long)]
    pub demand: PathBuf,
    /// Day to use when the demand file holds several.
    #[arg(long)]
    pub day: Option<String>,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Relative-gap tolerance of the equilibrium and optimum solvers.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Iteration cap of those solvers.
    #[arg(long)]
    pub max_iterations: Option<usize>,
}

impl SolverArgs {
    pub fn options(&self, default_tol: f64) -> SolverOptions {
        let mut o = SolverOptions::with_tol(self.tol.unwrap_or(default_tol));
        if let Some(n) = self.max_iterations {
            o.max_iterations = n;
        }
        o
    }

    pub fn record(&self, cfg: &mut output::RunConfig, default_tol: f64) {
        let o = self.options(default_tol);
        cfg.option("tol", o.tol);
        cfg.option("max_iterations", o.max_iterations);
    }
}

#[derive(Debug, Args)]
pub struct DesignKnobs {
    /// Weight on welfare against equity.
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    pub lambda: f64,
    /// Toll support: one edge id per line. Defaults to the tollable edges.
    #[arg(long)]
    pub support: Option<PathBuf>,
}

pub fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse::<Scheme>().map_err(|e| e.to_string())
}

/// Exit code for a failed run: the first library error in the chain
/// decides; anything else is an input problem.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<equitoll::Error>() {
            return match e.root() {
                equitoll::Error::NonConvergence { .. } => EXIT_NON_CONVERGENCE,
                equitoll::Error::Lp(_) => EXIT_LP,
                _ => EXIT_INPUT,
            };
        }
    }
    EXIT_INPUT
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Equilibrium(a) => commands::equilibrium(a),
        Command::Design(a) => commands::design(a),
        Command::Calibrate(a) => commands::calibrate(a),
        Command::EstimateVot(a) => commands::estimate_vot(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Pareto(a) => commands::pareto(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
