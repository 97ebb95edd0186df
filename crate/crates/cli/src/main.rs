mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Coil deployment simulator: deploy coils into cavities, voxelize and
/// classify the results, run parameter sweeps and perturbation ensembles.
#[derive(Parser, Debug)]
#[command(name = "coilsim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Deploy one coil and classify the result.
    Simulate(SimulateArgs),
    /// Sample one parameter over an interval and report binned fraction curves.
    Sweep(SweepArgs),
    /// Deploy from catheter tips perturbed uniformly in a ball.
    Perturb(PerturbArgs),
    /// Voxelize a centerline on the scenario's analysis lattice.
    Voxelize(VoxelizeArgs),
    /// Classify a voxel grid against the scenario's region partition.
    Classify(ClassifyArgs),
    /// Aggregate the voxel grids of finished runs into ensemble statistics.
    Report(ReportArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Scenario config (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Directory the run directory is created in.
    #[arg(long, default_value = "runs")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Steps between snapshots (0: final state only).
    #[arg(long)]
    pub snapshot_every: Option<u64>,
}

#[derive(Args, Debug, Clone)]
pub struct Workers {
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long, env = "COILSIM_WORKERS")]
    pub workers: Option<usize>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ThresholdArgs {
    #[arg(long)]
    pub core_th: Option<f64>,
    #[arg(long)]
    pub boundary_th: Option<f64>,
    #[arg(long)]
    pub sphere_th: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Scenario config; read from the sweep directory when resuming.
    #[arg(long, required_unless_present = "resume")]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "runs")]
    pub out: PathBuf,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub workers: Workers,
    /// E, D2 or D3.
    #[arg(long, required_unless_present = "resume")]
    pub variable: Option<String>,
    /// Interval in SI units; defaults to the variable's standard interval.
    #[arg(long, requires = "max")]
    pub min: Option<f64>,
    #[arg(long, requires = "min")]
    pub max: Option<f64>,
    #[arg(long, default_value_t = 150)]
    pub samples: usize,
    #[arg(long, default_value_t = 5)]
    pub bins: usize,
    #[arg(long, default_value_t = 30)]
    pub min_per_bin: usize,
    /// Continue an interrupted sweep in this directory, skipping finished runs.
    #[arg(long)]
    pub resume: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PerturbArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub workers: Workers,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
    /// Ball radius for the tip offsets [m].
    #[arg(long, default_value_t = 1e-3)]
    pub radius: f64,
    #[arg(long, default_value_t = 50)]
    pub runs: usize,
    /// Scenario label in the class histogram; defaults to the config file stem.
    #[arg(long)]
    pub scenario: Option<String>,
}

#[derive(Args, Debug)]
pub struct VoxelizeArgs {
    #[command(flatten)]
    pub common: Common,
    /// Centerline CSV with one x,y,z row per node.
    #[arg(long)]
    pub centerline: PathBuf,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Raw voxel grid (with its JSON header next to it).
    #[arg(long)]
    pub voxels: PathBuf,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
    /// Run directories, or directories whose subdirectories are runs.
    #[arg(required = true)]
    pub dirs: Vec<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Perturb(a) => commands::perturb(a),
        Command::Voxelize(a) => commands::voxelize(a),
        Command::Classify(a) => commands::classify(a),
        Command::Report(a) => commands::report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e) as u8)
        }
    }
}
