//! `ghr`: compute generalized uncertainty lower bounds from the central
//! moments of a conjugate variable, and verify the closed forms against
//! explicit finite-dimensional Hilbert-space models.
//!
//! Exit codes: 0 success, 1 invalid configuration or invalid moments,
//! 2 degenerate input (the bound is infinite or undefined, still reported).

mod commands;
mod input;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "ghr",
    version,
    about = "Generalized Heisenberg-bound calculator",
    long_about = "Computes the uncertainty lower bound series (the Heisenberg term plus \
                  higher-order corrections built from even central moments) and cross-checks \
                  it against brute-force Hilbert-space models."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the bound series for a distribution, spectrum, or moments file
    Bound(BoundArgs),
    /// Expand a distribution into central moments and cumulants, with a validity report
    Moments(MomentsArgs),
    /// Cross-validate the closed forms against explicit Hilbert-space models
    Verify(VerifyArgs),
    /// Sweep the gamma shape parameter and emit CSV
    Sweep(SweepArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    /// Arbitrary-precision rationals; identities hold exactly
    Exact,
    /// 64-bit floating point
    Real,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    Csv,
    JsonLines,
}

#[derive(Args)]
pub struct DistArgs {
    /// Distribution family: gamma, exponential, or gaussian
    #[arg(long)]
    pub dist: Option<String>,
    /// Gamma shape parameter (fractions like 7/2 are accepted)
    #[arg(long)]
    pub shape: Option<String>,
    /// Gamma or exponential rate parameter [default: 1]
    #[arg(long)]
    pub rate: Option<String>,
    /// Gaussian variance
    #[arg(long)]
    pub variance: Option<String>,
    /// JSON spectrum file: [{"eigenvalue": E, "probability": p}, ...] or
    /// amplitude_re/amplitude_im entries
    #[arg(long)]
    pub spectrum_file: Option<String>,
    /// JSON moments file ('-' for stdin): {"order": N, "mu": [...], "exact": [["num","den"], ...]}
    #[arg(long)]
    pub moments_file: Option<String>,
}

#[derive(Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub dist: DistArgs,
    /// Largest (odd) series index to compute
    #[arg(long, default_value_t = 5)]
    pub kmax: usize,
    /// Scalar backend; defaults to GHR_BACKEND or real
    #[arg(long, value_enum)]
    pub backend: Option<Backend>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    pub output: OutputFormat,
}

#[derive(Args)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub dist: DistArgs,
    /// Largest moment order to emit
    #[arg(long, default_value_t = 8)]
    pub order: usize,
    /// Scalar backend; defaults to GHR_BACKEND or real
    #[arg(long, value_enum)]
    pub backend: Option<Backend>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    pub output: OutputFormat,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Model dimensions as start:stop[:step] or a single value [default: 4:12]
    #[arg(long)]
    pub dims: Option<String>,
    /// Seeded models per dimension
    #[arg(long, default_value_t = 25)]
    pub seeds: u64,
    /// Largest (odd) series index to check
    #[arg(long, default_value_t = 5)]
    pub kmax: usize,
    /// Relative error tolerance for the identity checks
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
    /// Verify a single spectrum file instead of the random ensemble
    #[arg(long)]
    pub spectrum_file: Option<String>,
}

#[derive(Args)]
pub struct SweepArgs {
    /// Distribution family (gamma is the only supported sweep)
    #[arg(long)]
    pub dist: Option<String>,
    /// Gamma shape range as start:stop[:step]
    #[arg(long)]
    pub shape_range: String,
    /// Largest (odd) series index per row
    #[arg(long, default_value_t = 5)]
    pub kmax: usize,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn resolve_backend(flag: Option<Backend>) -> Result<Backend, String> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var("GHR_BACKEND") {
        Ok(v) => match v.to_ascii_lowercase().as_str() {
            "exact" => Ok(Backend::Exact),
            "real" => Ok(Backend::Real),
            other => Err(format!(
                "GHR_BACKEND must be 'exact' or 'real', got '{other}'"
            )),
        },
        Err(_) => Ok(Backend::Real),
    }
}

fn main() {
    // Die quietly when a downstream pipe closes (e.g. `ghr sweep ... | head`).
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let code = match &cli.command {
        Command::Bound(args) => match resolve_backend(args.backend) {
            Ok(b) => commands::cmd_bound(args, b == Backend::Exact),
            Err(e) => {
                eprintln!("error: {e}");
                1
            }
        },
        Command::Moments(args) => match resolve_backend(args.backend) {
            Ok(b) => commands::cmd_moments(args, b == Backend::Exact),
            Err(e) => {
                eprintln!("error: {e}");
                1
            }
        },
        Command::Verify(args) => commands::cmd_verify(args),
        Command::Sweep(args) => commands::cmd_sweep(args),
    };
    std::process::exit(code);
}
