//! `nvemkit`: command-line front end for the VEM and NVEM solvers.
//!
//! Exit status: 0 success, 1 numerical failure, 2 I/O or configuration
//! failure.

mod commands;
mod config;
mod report;
mod setup;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ConfigError, Flags, ProblemKind, RunConfig};
use nvem::problem::{Method, Stabilization};

#[derive(Parser, Debug)]
#[command(name = "nvemkit", version, about = "VEM and NVEM solvers for 2D linear elasticity")]
struct Cli {
    /// vem or nvem
    #[arg(long, global = true)]
    method: Option<String>,
    /// plain, dtilde, dmu-full or dmu-shear
    #[arg(long, global = true)]
    stab: Option<String>,
    /// Output directory (default `out`, or `dir` in [output])
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Mesh generator seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one static problem; writes solution.vtk and report.json
    Run { config: PathBuf },
    /// Convergence study over a mesh sequence; writes rates.csv and report.json
    Converge { config: PathBuf },
    /// Patch test on the default or configured meshes
    PatchTest { config: Option<PathBuf> },
    /// Eigenvalues of the unconstrained stiffness; writes spectrum.csv
    Eig { config: Option<PathBuf> },
    /// HHT-α response of the cantilever; writes probe.csv
    Dynamics { config: Option<PathBuf> },
    /// Generate a mesh from [mesh]; writes mesh.msh and mesh.vtk
    MeshGen { config: PathBuf },
}

fn parse_flags(cli: &Cli) -> Result<Flags, ConfigError> {
    let e = |err: nvem::Error| ConfigError(err.to_string());
    Ok(Flags {
        method: cli.method.as_deref().map(str::parse::<Method>).transpose().map_err(e)?,
        stab: cli.stab.as_deref().map(str::parse::<Stabilization>).transpose().map_err(e)?,
        out: cli.out.clone(),
        seed: cli.seed,
    })
}

fn load(path: Option<&PathBuf>, default: ProblemKind) -> Result<RunConfig, ConfigError> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::preset(default)),
    }
}

fn execute(cli: &Cli) -> anyhow::Result<()> {
    let flags = parse_flags(cli)?;
    let (mut cfg, action): (RunConfig, fn(&RunConfig, bool) -> anyhow::Result<()>) = match &cli.command {
        Command::Run { config } => (RunConfig::load(config)?, |c, _| commands::run(c)),
        Command::Converge { config } => (RunConfig::load(config)?, |c, _| commands::converge(c)),
        Command::PatchTest { config } => (load(config.as_ref(), ProblemKind::PatchTest)?, commands::patch_test),
        Command::Eig { config } => (load(config.as_ref(), ProblemKind::PatchTest)?, |c, _| commands::eig(c)),
        Command::Dynamics { config } => (load(config.as_ref(), ProblemKind::Cantilever)?, |c, _| commands::dynamics(c)),
        Command::MeshGen { config } => (RunConfig::load(config)?, |c, _| commands::mesh_gen(c)),
    };
    cfg.apply_flags(&flags);
    action(&cfg, flags.stab.is_some() || flags.method.is_some())
}

/// 2 for configuration and I/O problems, 1 for everything numerical.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<ConfigError>() || cause.is::<std::io::Error>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<nvem::Error>() {
            return match e {
                nvem::Error::Parse { .. }
                | nvem::Error::InvalidMesh(_)
                | nvem::Error::Material(_)
                | nvem::Error::UnknownTag(_)
                | nvem::Error::Argument(_)
                | nvem::Error::Io(_) => 2,
                _ => 1,
            };
        }
    }
    1
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
