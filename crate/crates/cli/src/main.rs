use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

mod channel_file;
mod commands;
mod report;

use report::OutputArgs;

/// E0 of binary-input channels under polarization, with the BEC/BSC
/// extremality checks and the supporting numerical scans.
#[derive(Parser)]
#[command(name = "polar-extrema", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// E0, capacity, Bhattacharyya and Z(rho) of one channel.
    E0(E0Args),
    /// One polarization step on a pair of channels: ordering and sum checks.
    Transform(TransformArgs),
    /// Extremality of the matched BEC and BSC, for pairs or identical copies.
    VerifyTheorem(VerifyArgs),
    /// Numerical scans of the analytic lemmas.
    CertifyLemmas(CertifyArgs),
    /// Recursive polarization tree with trajectories and martingale checks.
    Polarize(PolarizeArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RandomArgs {
    /// Number of random channels (or pairs) to draw instead of reading files.
    #[arg(long)]
    pub random: Option<usize>,
    /// Output alphabet size of random channels.
    #[arg(long, default_value_t = 4)]
    pub outputs: usize,
    /// Seed of the random channel generator.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct E0Args {
    /// Channel file.
    pub channel: PathBuf,
    /// Values of rho (repeatable).
    #[arg(long = "rho", default_values_t = vec![1.0])]
    pub rho: Vec<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TransformArgs {
    /// Two channel files; omit with --random.
    #[arg(num_args = 0..=2)]
    pub channels: Vec<PathBuf>,
    #[arg(long = "rho", default_values_t = vec![1.0])]
    pub rho: Vec<f64>,
    #[command(flatten)]
    pub random: RandomArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    /// One channel file (identical copies) or two; omit with --random.
    #[arg(num_args = 0..=2)]
    pub channels: Vec<PathBuf>,
    #[arg(long = "rho", default_values_t = vec![0.5, 1.0, 1.5, 2.0, 3.0])]
    pub rho: Vec<f64>,
    #[command(flatten)]
    pub random: RandomArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CertifyArgs {
    /// Values of rho for the scans (repeatable); a default grid when absent.
    #[arg(long = "rho")]
    pub rho: Vec<f64>,
    /// Uniform steps on [2^-rho, 1].
    #[arg(long, default_value_t = 512)]
    pub t_steps: usize,
    /// Uniform steps of the z cell grid.
    #[arg(long, default_value_t = 20)]
    pub z_steps: usize,
    /// Tolerance on raw second differences.
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    /// Random refinement probes per cell.
    #[arg(long, default_value_t = 8)]
    pub probes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also require t -> H(z, rho, t) to be affine in every cell.
    #[arg(long)]
    pub affine_check: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PolarizeArgs {
    /// Channel file.
    pub channel: PathBuf,
    #[arg(long, default_value_t = 6)]
    pub depth: usize,
    #[arg(long = "rho", default_values_t = vec![1.0])]
    pub rho: Vec<f64>,
    /// Support size that triggers quantization.
    #[arg(long, default_value_t = 1024)]
    pub max_atoms: usize,
    /// Number of z cells used when quantizing (default: max-atoms - 2).
    #[arg(long)]
    pub quantize: Option<usize>,
    /// Also write the per-node trajectory CSV here.
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn main() -> ExitCode {
    if let Ok(v) = std::env::var("POLAR_EXTREMA_THREADS") {
        match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => {
                polar_extrema::par::set_max_threads(n);
            }
            _ => {
                eprintln!("error: POLAR_EXTREMA_THREADS must be a positive integer, got {v:?}");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::E0(a) => commands::e0(a),
        Command::Transform(a) => commands::transform(a),
        Command::VerifyTheorem(a) => commands::verify_theorem(a),
        Command::CertifyLemmas(a) => commands::certify_lemmas(a),
        Command::Polarize(a) => commands::polarize(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
