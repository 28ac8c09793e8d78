//! `baa`: command-line front end for the adaptive adiabatic schedule simulator.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use baa_core::{CostFunction, RunParams};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(name = "baa", version, about = "Adaptive adiabatic schedules on the complete graph")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct GlobalArgs {
    /// Seed for instance generation, oracle sampling and measurement.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for multi-run commands.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: u64,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// JSON object with the same keys as the flags; explicit flags win.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Ground energy, first excited energy, gap, X and phi(m) on a grid of s.
    #[command(args_override_self = true)]
    Spectrum(SpectrumArgs),
    /// Spectral gap on a grid of s, with the closed form for Grover instances.
    #[command(args_override_self = true)]
    GapProfile(GapProfileArgs),
    /// Cheeger sandwich audit along a grid of s.
    #[command(args_override_self = true)]
    CheegerAudit(CheegerArgs),
    /// Builds an adaptive schedule and evolves along it.
    #[command(args_override_self = true)]
    BaaRun(BaaRunArgs),
    /// Evolves along a stored schedule.
    #[command(args_override_self = true)]
    Evolve(EvolveArgs),
    /// Runs the spectral-ratio guessing loop.
    #[command(args_override_self = true)]
    OptimizeRun(OptimizeArgs),
    /// Query counts and schedule times across sizes and seeds.
    #[command(args_override_self = true)]
    ScalingStudy(ScalingArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceKind {
    Grover,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    Exact,
    Sampled,
}

#[derive(Debug, Args, Serialize)]
pub struct InstanceArgs {
    /// Cost function JSON: {"V": .., "costs": [..], "m": ..}.
    #[arg(long, conflicts_with = "generate", required_unless_present = "generate")]
    pub instance: Option<PathBuf>,
    /// Generate an instance instead of reading one.
    #[arg(long, value_enum)]
    pub generate: Option<InstanceKind>,
    /// Vertex count of a generated instance.
    #[arg(long, default_value_t = 64)]
    pub size: usize,
    /// Grover weight w of a generated Grover instance.
    #[arg(long, default_value_t = 1.0)]
    pub weight: f64,
    /// chi of a generated random instance.
    #[arg(long, default_value_t = 0.5)]
    pub chi: f64,
    /// kappa of a generated random instance.
    #[arg(long, default_value_t = 2.0)]
    pub kappa: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct RunArgs {
    #[arg(long, default_value_t = 0.5)]
    pub c0: f64,
    #[arg(long, default_value_t = 0.2)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    pub p: f64,
    /// Per-segment integrator tolerance.
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
}

impl RunArgs {
    pub fn params(&self, seed: u64) -> RunParams {
        RunParams {
            c0: self.c0,
            epsilon: self.epsilon,
            p: self.p,
            seed,
            tol: self.tol,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Number of s values, evenly spaced over [0, 1].
    #[arg(long, default_value_t = 101, value_parser = clap::value_parser!(u64).range(2..))]
    pub s_grid: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct GapProfileArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Number of s values, evenly spaced over [0, 1].
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(2..))]
    pub grid: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct CheegerArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Number of s values `i / N`, `i = 0..N`.
    #[arg(long, default_value_t = 65, value_parser = clap::value_parser!(u64).range(1..))]
    pub grid: u64,
    /// Also compute the Cheeger constant over all cuts (V <= 20).
    #[arg(long)]
    pub bruteforce: bool,
    /// Exit with status 4 when any row is violated.
    #[arg(long)]
    pub audit: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct BaaRunArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_enum, default_value_t = OracleKind::Sampled)]
    pub oracle: OracleKind,
    /// Oracle trace as JSON lines (sampled oracle only).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Also write the schedule alone, in the format `evolve` reads.
    #[arg(long)]
    pub schedule_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Schedule JSON: {"checkpoints": [{"s": .., "gamma": ..}], "times": [..]}.
    #[arg(long)]
    pub schedule: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Cost schedules by their total time without integrating or measuring.
    #[arg(long)]
    pub analytic_cost: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct ScalingArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Vertex counts, comma separated.
    #[arg(long, value_delimiter = ',', required = true, action = clap::ArgAction::Set)]
    pub sizes: Vec<usize>,
    #[arg(long = "class", value_enum, default_value_t = InstanceKind::Grover)]
    pub class: InstanceKind,
    #[arg(long, default_value_t = 1.0)]
    pub weight: f64,
    #[arg(long, default_value_t = 0.5)]
    pub chi: f64,
    #[arg(long, default_value_t = 2.0)]
    pub kappa: f64,
    /// Seeds `seed, seed + 1, ..` per size.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub seeds: u64,
    #[arg(long, value_enum, default_value_t = OracleKind::Sampled)]
    pub oracle: OracleKind,
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(PathBuf, std::io::Error),
    Core(baa_core::Error),
    Audit(String),
}

impl From<baa_core::Error> for CliError {
    fn from(e: baa_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Audit(m) => write!(f, "audit failed: {m}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(..) => 2,
            CliError::Core(e) if e.is_validation() => 2,
            CliError::Core(_) => 3,
            CliError::Audit(_) => 4,
        }
    }
}

pub fn load_instance(args: &InstanceArgs, seed: u64) -> Result<(CostFunction, Option<Vec<u8>>), CliError> {
    use baa_core::model::{make_grover_cost, make_random_cost};
    match (&args.instance, args.generate) {
        (Some(path), _) => {
            let bytes = std::fs::read(path).map_err(|e| CliError::Io(path.clone(), e))?;
            let text = String::from_utf8(bytes.clone()).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            Ok((CostFunction::from_json(&text)?, Some(bytes)))
        }
        (None, Some(InstanceKind::Grover)) => Ok((make_grover_cost(args.size, args.weight)?, None)),
        (None, Some(InstanceKind::Random)) => Ok((make_random_cost(args.size, args.chi, args.kappa, seed)?, None)),
        (None, None) => Err(CliError::Usage("one of --instance or --generate is required".into())),
    }
}

fn main() -> ExitCode {
    let args = match config::expand_args(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let cli = Cli::parse_from(args);
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
