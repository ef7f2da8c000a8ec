//! `cgm` — command-line driver for the corner growth model laboratory.
//!
//! A run is determined by a subcommand plus configuration from three
//! sources with increasing precedence: a built-in preset, a JSON config
//! file, and command-line flags. Every run writes its artifacts plus a
//! `run.json` manifest; feeding a manifest back through `--config`
//! reproduces the artifacts byte-for-byte.

mod config;
mod runs;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::RunConfig;

/// Error carrying a stable machine-readable code; printed as a single
/// JSON line on stderr.
#[derive(Debug)]
pub struct CliError {
    pub code: String,
    pub message: String,
}

impl CliError {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        CliError {
            code: code.to_string(),
            message: message.into(),
        }
    }

    fn json_line(&self) -> String {
        serde_json::json!({"error": self.code, "message": self.message}).to_string()
    }
}

impl From<cgm::Error> for CliError {
    fn from(e: cgm::Error) -> Self {
        CliError::new(e.code(), e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "cgm",
    version,
    about = "Corner growth model laboratory: simulations, limit shapes, and statistical checks",
    arg_required_else_help = true
)]
struct Cli {
    /// JSON run configuration (a previous run's manifest also works).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Built-in experiment: rost, fig1b, fig1c, fig1d, rains-squares.
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,
    /// Base seed; all randomness derives from it deterministically.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: hardware count). Artifacts do not depend
    /// on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory (default: cgm-out).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Time horizon.
    #[arg(long, global = true)]
    t: Option<f64>,
    /// Grid extents, MxN or a single square extent.
    #[arg(long, global = true, value_name = "MxN")]
    grid: Option<String>,
    /// Monte Carlo replicas for the verification commands.
    #[arg(long, global = true)]
    replicas: Option<usize>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Grow a cluster and write its raster plus the predicted boundary.
    Simulate,
    /// Write the limit-shape boundary polyline and axis features.
    Shape,
    /// Solve the finite-size centering problem at the grid size.
    Centering,
    /// Height, particle positions, and flux of the exclusion process.
    Tasep,
    /// KS checks of stationary increment laws along rows and columns.
    VerifyBurke,
    /// Two-sample check that permuted parameters leave the law unchanged.
    VerifyPermutation,
    /// Upper/lower exceedance decay of the centered passage time.
    VerifyTails,
    /// Exit-point localization at the variance-balancing tilt.
    VerifyExit,
    /// Hausdorff distance between the scaled cluster and the predicted
    /// region.
    VerifyLimitshape,
    /// Concentration of sums of independent exponentials.
    VerifyExpsum,
    /// Block-constant growth ratio against its series limit.
    Rains,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Shape => "shape",
            Command::Centering => "centering",
            Command::Tasep => "tasep",
            Command::VerifyBurke => "verify-burke",
            Command::VerifyPermutation => "verify-permutation",
            Command::VerifyTails => "verify-tails",
            Command::VerifyExit => "verify-exit",
            Command::VerifyLimitshape => "verify-limitshape",
            Command::VerifyExpsum => "verify-expsum",
            Command::Rains => "rains",
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut merged = match &cli.config {
        Some(path) => config::load_config_file(path)?,
        None => RunConfig::default(),
    };
    // Flags take precedence over the config file.
    if let Some(v) = cli.preset {
        merged.preset = Some(v);
    }
    if let Some(v) = cli.seed {
        merged.seed = Some(v.to_string());
    }
    if let Some(v) = cli.threads {
        merged.threads = Some(v.to_string());
    }
    if let Some(v) = &cli.out {
        merged.out = Some(v.display().to_string());
    }
    if let Some(v) = cli.t {
        merged.t = Some(v.to_string());
    }
    if let Some(v) = cli.grid {
        merged.grid = Some(v);
    }
    if let Some(v) = cli.replicas {
        merged.replicas = Some(v.to_string());
    }
    let command = match cli.command {
        Some(c) => c.name().to_string(),
        None => merged.command.clone().ok_or_else(|| {
            CliError::new(
                "config",
                "no subcommand given and the config file names no command",
            )
        })?,
    };
    let resolved = config::resolve(command, merged)?;
    if let Some(threads) = resolved.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::new("config", format!("thread pool: {e}")))?;
    }
    runs::dispatch(&resolved)
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("{}", e.json_line());
        std::process::exit(1);
    }
}
