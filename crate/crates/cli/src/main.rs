//! `mnlab`: solve, sweep and inspect positive solutions of
//! `−u'' = λu + a_h(x)uᵖ` on `(0, 1)` with Dirichlet conditions.

// `!(x > 0.0)` style guards reject NaN together with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod output;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mnlab::solvers::SolverConfig;
use mnlab::{FlowConfig, QuadratureConfig};
use output::{CliError, CliResult, Format, Sink};

#[derive(Parser, Debug)]
#[command(
    name = "mnlab",
    version,
    about = "Positive solutions of a degenerate superlinear Dirichlet problem"
)]
pub struct Cli {
    /// Quadrature tolerance (absolute and relative).
    #[arg(long, global = true)]
    tol_quad: Option<f64>,
    /// Runge–Kutta tolerance (absolute and relative).
    #[arg(long, global = true)]
    tol_rk: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write tables here instead of stdout; side files also go here.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Emit SVG plots next to the tables.
    #[arg(long, global = true)]
    plot: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Symmetric solution, all solutions (--all), or a matching pair (--match).
    Solve(SolveArgs),
    /// Bifurcation diagram in λ.
    Sweep(SweepArgs),
    /// Symmetric solutions as the window closes the interval.
    Blowup(BlowupArgs),
    /// Metasolution sequence of fixed amplitude.
    Sequence(SequenceArgs),
    /// φ(R, θ) curves and their landmarks.
    Landscape(LandscapeArgs),
    /// Empirical symmetry-breaking λ for each h.
    Pitchfork(PitchforkArgs),
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct SolveArgs {
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, default_value_t = 3.0)]
    pub p: f64,
    #[arg(
        long,
        required_unless_present = "matching",
        conflicts_with = "matching"
    )]
    pub h: Option<f64>,
    /// Scan for every positive solution instead of the symmetric one.
    #[arg(long, conflicts_with = "matching")]
    pub all: bool,
    /// Upper end of the slope scan (default: derived from the symmetric solution).
    #[arg(long, requires = "all")]
    pub v0_max: Option<f64>,
    #[arg(long, default_value_t = 400, requires = "all")]
    pub n_scan: usize,
    /// Construct an asymmetric pair at amplitude --R (λ > 0).
    #[arg(long = "match", id = "matching", requires = "r")]
    pub matching: bool,
    #[arg(long = "R", id = "r")]
    pub r: Option<f64>,
    /// Starting half-width of the landscape's excluded bands.
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
    /// Write one trajectory CSV per solution.
    #[arg(long)]
    pub trajectory: bool,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 3.0)]
    pub p: f64,
    /// One or more window widths; each is swept as its own job.
    #[arg(long, value_delimiter = ',', required = true)]
    pub h: Vec<f64>,
    /// Explicit λ grid.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with_all = ["lambda_min", "lambda_max"])]
    pub lambda: Vec<f64>,
    #[arg(long, requires = "lambda_max")]
    pub lambda_min: Option<f64>,
    #[arg(long, requires = "lambda_min")]
    pub lambda_max: Option<f64>,
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
    /// Skip the scan for asymmetric solutions.
    #[arg(long)]
    pub symmetric_only: bool,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct BlowupArgs {
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, default_value_t = 3.0)]
    pub p: f64,
    #[arg(long, value_delimiter = ',', required = true)]
    pub h: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    pub probes: Vec<f64>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct SequenceArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 3.0)]
    pub p: f64,
    #[arg(long)]
    pub n: usize,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct LandscapeArgs {
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, default_value_t = 3.0)]
    pub p: f64,
    #[arg(long = "R", value_delimiter = ',', required = true)]
    pub r: Vec<f64>,
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
    /// Samples per curve.
    #[arg(long, default_value_t = 400)]
    pub points: usize,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct PitchforkArgs {
    #[arg(long, default_value_t = 3.0)]
    pub p: f64,
    #[arg(long, value_delimiter = ',', required = true)]
    pub h: Vec<f64>,
    #[arg(long, default_value_t = -60.0)]
    pub lambda_lo: f64,
    #[arg(long, default_value_t = 9.86)]
    pub lambda_hi: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub resolution: f64,
}

fn solver_config(cli: &Cli) -> CliResult<SolverConfig> {
    let mut cfg = SolverConfig::default();
    if let Some(t) = cli.tol_quad {
        if !(t > 0.0 && t < 1.0) {
            return Err(CliError::Usage(format!(
                "--tol-quad must lie in (0, 1), got {t}"
            )));
        }
        cfg.quad = QuadratureConfig::with_tol(t);
    }
    if let Some(t) = cli.tol_rk {
        if !(t > 0.0 && t < 1.0) {
            return Err(CliError::Usage(format!(
                "--tol-rk must lie in (0, 1), got {t}"
            )));
        }
        cfg.flow = FlowConfig {
            rk_abs_tol: t,
            rk_rel_tol: t,
            ..cfg.flow
        };
    }
    Ok(cfg)
}

/// Worker pool capped by `MNLAB_THREADS`.
fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("MNLAB_THREADS") {
        match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => builder = builder.num_threads(n),
            _ => {
                return Err(CliError::Usage(format!(
                    "MNLAB_THREADS must be a positive integer, got {v:?}"
                )))
            }
        }
    }
    builder.build().map_err(|e| CliError::Io(e.to_string()))
}

fn run(cli: Cli) -> CliResult {
    let cfg = solver_config(&cli)?;
    let pool = thread_pool()?;
    let sink = Sink::new(cli.format, cli.out.clone(), cli.plot)?;
    let ctx = commands::Context { cfg, pool, sink };
    match &cli.command {
        Command::Solve(a) => commands::solve(&ctx, a),
        Command::Sweep(a) => commands::sweep(&ctx, a),
        Command::Blowup(a) => commands::blowup(&ctx, a),
        Command::Sequence(a) => commands::sequence(&ctx, a),
        Command::Landscape(a) => commands::landscape(&ctx, a),
        Command::Pitchfork(a) => commands::pitchfork(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mnlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
