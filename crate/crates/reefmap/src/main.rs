//! Command-line front end: equilibria, stability classification, flip and
//! circle-crossing discriminants, step-size and blend control, orbits, and
//! bifurcation sweeps, all emitting plot-ready CSV plus a text report.

mod commands;
mod config;
mod csvout;

use clap::{Args, Parser, Subcommand};
use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

/// Errors mapped to process exit codes: usage 2, domain and IO 3.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(String),
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Domain(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) | CliError::Io(_) => 3,
        }
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Parameter file of flat `key = value` lines.
    #[arg(long, value_name = "FILE")]
    pub params: Option<PathBuf>,

    /// Override one configuration key (repeatable, applied in order).
    #[arg(long, value_name = "KEY=VALUE")]
    pub set: Vec<String>,

    /// Step size; overrides the file and any --set.
    #[arg(long, value_name = "X", allow_negative_numbers = true)]
    pub delta: Option<f64>,

    /// Initial condition M,C (repeatable).
    #[arg(long, value_name = "M,C", allow_hyphen_values = true)]
    pub ic: Vec<String>,

    /// Output directory for the CSV and report.
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,

    /// Decimal places in CSV numbers.
    #[arg(long, value_name = "N", default_value_t = 6)]
    pub precision: usize,
}

/// Shared flags plus an explicit analysis point.
#[derive(Debug, Args)]
pub struct PointArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Fixed point to analyze; defaults to the first --ic, then the first
    /// interior equilibrium, then an axial one.
    #[arg(long, value_name = "M,C", allow_hyphen_values = true)]
    pub point: Option<String>,
}

#[derive(Debug, Args)]
pub struct FlipArgs {
    #[command(flatten)]
    pub point: PointArgs,

    /// Which F(-1) root to take: f1 (smaller) or f2.
    #[arg(long, default_value = "f1")]
    pub branch: String,
}

#[derive(Debug, Args)]
pub struct OgyArgs {
    #[command(flatten)]
    pub point: PointArgs,

    /// Linearization file with keys j11, j12, j21, j22, b1, b2; bypasses the
    /// fixed-point computation.
    #[arg(long, value_name = "FILE")]
    pub jb: Option<PathBuf>,

    /// Gain pair R1,R2 to test (and simulate with, in fixed-point mode).
    #[arg(long, value_name = "R1,R2", allow_hyphen_values = true)]
    pub gains: Option<String>,

    /// Feedback is switched off when it would move delta by more than this.
    #[arg(long, default_value_t = 0.2)]
    pub epsilon: f64,

    /// Simulation length.
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
}

#[derive(Debug, Args)]
pub struct HybridArgs {
    #[command(flatten)]
    pub point: PointArgs,

    /// Blend weight in (0, 1] to simulate with (needs an --ic).
    #[arg(long, allow_negative_numbers = true)]
    pub zeta: Option<f64>,

    /// Simulation length.
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
}

#[derive(Debug, Args)]
pub struct OrbitArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Steps discarded before sampling.
    #[arg(long, default_value_t = 2000)]
    pub transient: usize,

    /// States retained after the transient.
    #[arg(long, default_value_t = 512)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Parameter grid LO:HI:N (inclusive endpoints, N >= 2).
    #[arg(long, value_name = "LO:HI:N")]
    pub range: String,

    /// Which parameter to sweep: delta or r.
    #[arg(long, default_value = "delta")]
    pub param: String,

    /// Steps discarded before sampling, per cell.
    #[arg(long, default_value_t = 2000)]
    pub transient: usize,

    /// States retained per cell.
    #[arg(long, default_value_t = 512)]
    pub samples: usize,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// List every equilibrium of the configured parameter set.
    Equilibria(CommonArgs),
    /// Stability class and bifurcation thresholds at a fixed point.
    Classify(PointArgs),
    /// Period-doubling point and cascade discriminants at a fixed point.
    Flip(FlipArgs),
    /// Invariant-circle crossing and its first Lyapunov quantity.
    Ns(PointArgs),
    /// Step-size feedback design (gain-plane triangle) and simulation.
    Ogy(OgyArgs),
    /// Blended-map control interval and simulation.
    Hybrid(HybridArgs),
    /// Iterate from initial conditions and classify the attractor.
    Orbit(OrbitArgs),
    /// Attractor samples across a parameter grid (bifurcation diagram).
    Sweep(SweepArgs),
}

#[derive(Debug, Parser)]
#[command(name = "reefmap", version, about = "discrete-time macroalgae-coral map toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

fn common_of(cmd: &Cmd) -> &CommonArgs {
    match cmd {
        Cmd::Equilibria(c) => c,
        Cmd::Classify(a) => &a.common,
        Cmd::Flip(a) => &a.point.common,
        Cmd::Ns(a) => &a.common,
        Cmd::Ogy(a) => &a.point.common,
        Cmd::Hybrid(a) => &a.point.common,
        Cmd::Orbit(a) => &a.common,
        Cmd::Sweep(a) => &a.common,
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let common = common_of(&cli.cmd);
    let run_cfg = config::resolve(common.params.as_deref(), &common.set, common.delta)?;
    match &cli.cmd {
        Cmd::Equilibria(args) => commands::run_equilibria(args, &run_cfg),
        Cmd::Classify(args) => commands::run_classify(args, &run_cfg),
        Cmd::Flip(args) => commands::run_flip(args, &run_cfg),
        Cmd::Ns(args) => commands::run_ns(args, &run_cfg),
        Cmd::Ogy(args) => commands::run_ogy(args, &run_cfg),
        Cmd::Hybrid(args) => commands::run_hybrid(args, &run_cfg),
        Cmd::Orbit(args) => commands::run_orbit(args, &run_cfg),
        Cmd::Sweep(args) => commands::run_sweep(args, &run_cfg),
    }
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
