//! Command-line front end: classification, exit times, diffusion
//! simulation and the anisotropic example constructions, with
//! machine-readable output.
//!
//! Exit codes: 0 determined/certified, 1 determinate negative, 2 usage
//! error, 10 inconclusive numerics.

mod commands;
mod config_file;
mod emit;
mod model_args;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};

use warpclass_core::quad::QuadratureConfig;

use commands::{EXIT_INCONCLUSIVE, EXIT_USAGE};
use config_file::FileConfig;
use emit::Sink;

/// A user-input problem; always maps to exit code 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for Usage {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Parser)]
#[command(
    name = "warpclass",
    version,
    about = "Classify rotationally symmetric model manifolds: parabolicity, stochastic \
             completeness, the L1-Liouville property, Green kernels, mean exit times, and \
             Monte Carlo validation of the radial diffusion."
)]
struct Cli {
    /// TOML config file mirroring the flags; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the primary output to this file instead of stdout
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Output format [default: json]
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    /// Master seed for all Monte Carlo work [default: 0]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Relative quadrature tolerance; the absolute one is 100x tighter
    /// [default: 1e-8]
    #[arg(long = "quad-tol", global = true)]
    quad_tol: Option<f64>,
    /// Cutoff budget of the improper-integral classifier [default: 40]
    #[arg(long = "quad-jmax", global = true)]
    quad_jmax: Option<u32>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tri-state classification: parabolic, stochastically complete,
    /// L1-Liouville, volume-growth criterion, Green mass
    Classify {
        #[command(flatten)]
        model: model_args::ModelArgs,
    },
    /// Mean exit time F_R(r) from a geodesic ball, or the global F(r)
    ExitTime {
        #[command(flatten)]
        model: model_args::ModelArgs,
        #[command(flatten)]
        args: commands::ExitTimeArgs,
    },
    /// Euler-Maruyama simulation of the radial diffusion: first-exit
    /// statistics, explosion probe, stabilization scan
    Simulate {
        #[command(flatten)]
        model: model_args::ModelArgs,
        #[command(flatten)]
        args: commands::SimulateArgs,
    },
    /// Reproduce the anisotropic 2-d constructions
    #[command(subcommand)]
    Example(ExampleCommand),
    /// Solve the curvature IVP and check the minimal-submanifold
    /// comparison hypotheses
    Minimal {
        #[command(flatten)]
        args: commands::MinimalArgs,
    },
}

#[derive(Debug, Subcommand)]
enum ExampleCommand {
    /// One-end conformal construction: maximum-principle certificate and
    /// sector Green-mass divergence
    OneEnd {
        #[command(flatten)]
        model: model_args::ModelArgs,
        #[command(flatten)]
        args: commands::OneEndArgs,
    },
    /// Two-end connected-sum hypotheses: infinite volume on end 1,
    /// stochastic incompleteness on end 2
    TwoEnd {
        #[command(flatten)]
        args: commands::TwoEndArgs,
    },
}

/// Resolved global context handed to every command.
pub struct Ctx {
    pub quad: QuadratureConfig,
    pub format: OutputFormat,
    pub sink: Sink,
    pub seed: u64,
    pub file: FileConfig,
}

fn build_ctx(cli: &Cli) -> Result<Ctx> {
    let file = match &cli.config {
        Some(p) => config_file::load(p)?,
        None => FileConfig::default(),
    };
    let rel_tol = cli.quad_tol.or(file.quadrature.tol).unwrap_or(1e-8);
    if !(rel_tol > 0.0) {
        return Err(Usage(format!("--quad-tol must be positive, got {rel_tol}")).into());
    }
    let quad = QuadratureConfig {
        abs_tol: rel_tol / 100.0,
        rel_tol,
        j_max: cli.quad_jmax.or(file.quadrature.jmax).unwrap_or(40),
        ..QuadratureConfig::default()
    };
    quad.validate()?;
    let format = match (&cli.format, &file.output.format) {
        (Some(f), _) => *f,
        (None, Some(s)) => <OutputFormat as ValueEnum>::from_str(s, true)
            .map_err(|_| Usage(format!("unknown format `{s}` in config")))?,
        (None, None) => OutputFormat::Json,
    };
    let output = cli
        .output
        .clone()
        .or_else(|| file.output.path.as_ref().map(PathBuf::from));
    let seed = cli.seed.or(file.simulation.seed).unwrap_or(0);
    Ok(Ctx {
        quad,
        format,
        sink: Sink::new(output),
        seed,
        file,
    })
}

fn run(cli: Cli) -> Result<i32> {
    let ctx = build_ctx(&cli)?;
    match &cli.command {
        Command::Classify { model } => {
            let mm = model.resolve(&ctx.file.model)?;
            commands::classify(&ctx, &mm)
        }
        Command::ExitTime { model, args } => {
            let mm = model.resolve(&ctx.file.model)?;
            commands::exit_time(&ctx, &mm, args)
        }
        Command::Simulate { model, args } => {
            let mm = model.resolve(&ctx.file.model)?;
            commands::simulate(&ctx, &mm, args)
        }
        Command::Example(ExampleCommand::OneEnd { model, args }) => {
            let mut model = model.clone();
            model.dim = Some(model.dim.unwrap_or(2));
            if model.family.is_none() && ctx.file.model.family.is_none() {
                model.family = Some(model_args::FamilyName::SplicedExpPower);
            }
            let mm = model.resolve(&ctx.file.model)?;
            commands::example_one_end(&ctx, mm, args)
        }
        Command::Example(ExampleCommand::TwoEnd { args }) => commands::example_two_end(&ctx, args),
        Command::Minimal { args } => commands::minimal(&ctx, args),
    }
}

/// Usage problems exit 2; exhausted numerics exit 10; anything else is an
/// input/environment problem and also exits 2.
fn exit_code_for(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<Usage>().is_some() {
        return EXIT_USAGE;
    }
    if let Some(core) = err.downcast_ref::<warpclass_core::Error>() {
        return match core {
            warpclass_core::Error::AccuracyBudget { .. }
            | warpclass_core::Error::NonFinite { .. } => EXIT_INCONCLUSIVE,
            _ => EXIT_USAGE,
        };
    }
    EXIT_USAGE
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e) as u8)
        }
    }
}
