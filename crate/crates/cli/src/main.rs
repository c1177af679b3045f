//! `specgap`: model eigenvalues, bounds, matching, auxiliary functions and
//! verification checks from the command line.

mod commands;
mod config;
mod output;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Config;
use output::{write_records, Format};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<specgap::Error> for CliError {
    fn from(e: specgap::Error) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "specgap", version, about = "Spectral gap lower bounds from one-dimensional models")]
struct Cli {
    /// Output format [default: table; csv for sweep]
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Flat `key = value` file supplying defaults for any flag
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Model eigenvalue λ₁(n, K, D) with the classical bounds and ordering flags
    Bound(BoundArgs),
    /// Bound reports over a grid file with lines `n = ...`, `K = ...`, `D = ...`, `alpha = ...`
    Sweep(SweepArgs),
    /// Model start point whose Neumann solution has maximum u*
    Match(MatchArgs),
    /// Auxiliary function J and constant σ for a sampled Ricci profile
    Jsolve(JsolveArgs),
    /// Perturbed parameters (N, α, β, K̄, λ̄) and their conditions
    Perturb(PerturbArgs),
    /// Closed-form manifold checks, sphere gradient comparison and diameter chain
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// Dimension n
    #[arg(short = 'n', long = "n")]
    pub n: Option<f64>,
    /// Ricci lower bound per direction, Ric ≥ (n-1)K
    #[arg(short = 'K', long = "K", allow_negative_numbers = true)]
    pub k: Option<f64>,
    /// Diameter upper bound
    #[arg(short = 'D', long = "D")]
    pub d: Option<f64>,
    /// Fraction α of the model eigenvalue [default: 1]
    #[arg(short = 'a', long = "alpha")]
    pub alpha: Option<f64>,
    /// Aubry constant C(n, p); no closed form is known, so it must be supplied
    #[arg(long = "aubry-C")]
    pub aubry_c: Option<f64>,
    /// Integral curvature k̄(p, K) for the Aubry bound
    #[arg(long = "aubry-kbar")]
    pub aubry_kbar: Option<f64>,
    /// Exponent p for the Aubry bound
    #[arg(long = "aubry-p")]
    pub aubry_p: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Grid file
    pub grid: PathBuf,
}

#[derive(Debug, Args)]
pub struct MatchArgs {
    /// Model dimension N
    #[arg(short = 'N', long = "N")]
    pub big_n: Option<f64>,
    /// Model curvature K̄
    #[arg(short = 'K', long = "K-bar", allow_negative_numbers = true)]
    pub k_bar: Option<f64>,
    /// Eigenvalue λ̄
    #[arg(short = 'l', long = "lambda-bar")]
    pub lambda_bar: Option<f64>,
    /// Target maximum u* in (0, 1]
    #[arg(short = 'u', long = "u-star")]
    pub u_star: Option<f64>,
}

#[derive(Debug, Args)]
pub struct JsolveArgs {
    /// CSV file with header `t,rho` on a uniform mesh starting at 0
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// `circle` or `interval`
    #[arg(long)]
    pub geometry: Option<String>,
    /// Length of the circle or interval [default: inferred from t]
    #[arg(long)]
    pub length: Option<f64>,
    /// Ambient dimension n
    #[arg(short = 'n', long = "n")]
    pub n: Option<usize>,
    /// Curvature threshold K
    #[arg(short = 'K', long = "K", allow_negative_numbers = true)]
    pub k: Option<f64>,
    /// Exponent τ > 1 [default: 2]
    #[arg(long)]
    pub tau: Option<f64>,
    /// Allowed deviation sup|J - 1|
    #[arg(long)]
    pub delta: Option<f64>,
    /// Curvature smallness ε for the check 0 ≤ σ ≤ 4ε
    #[arg(long)]
    pub eps: Option<f64>,
    /// Exponent p for reporting k̄(p, K)
    #[arg(long)]
    pub p: Option<f64>,
    /// Write `t,J,W` samples to this file
    #[arg(long)]
    pub output_profile: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PerturbArgs {
    /// Dimension n ≥ 3
    #[arg(short = 'n', long = "n")]
    pub n: Option<f64>,
    /// Defect size δ > 0
    #[arg(long)]
    pub delta: Option<f64>,
    /// First eigenvalue λ₁
    #[arg(long)]
    pub lambda1: Option<f64>,
    /// Curvature K
    #[arg(short = 'K', long = "K", allow_negative_numbers = true)]
    pub k: Option<f64>,
    /// Constant σ from the auxiliary function [default: 0]
    #[arg(long)]
    pub sigma: Option<f64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Only rows whose name contains this text
    #[arg(long)]
    pub filter: Option<String>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            Config::parse(&text, &path.display().to_string())?
        }
        None => Config::default(),
    };
    let default_format = match cli.command {
        Command::Sweep(_) => Format::Csv,
        _ => Format::Table,
    };
    let format = config.or(cli.format, "format", default_format)?;

    let (records, failure) = match &cli.command {
        Command::Bound(a) => (vec![commands::bound(a, &config)?], None),
        Command::Sweep(a) => commands::sweep(a)?,
        Command::Match(a) => (vec![commands::matching(a, &config)?], None),
        Command::Jsolve(a) => (vec![commands::jsolve(a, &config)?], None),
        Command::Perturb(a) => (vec![commands::perturb(a, &config)?], None),
        Command::Verify(a) => (commands::verify(a, &config)?, None),
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    write_records(&mut out, &records, format)
        .and_then(|_| out.flush())
        .map_err(|e| CliError::Numerical(format!("writing output: {e}")))?;
    match failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(raw) = std::env::var("SPECGAP_THREADS") {
        match raw.trim().parse::<usize>() {
            Ok(threads) if threads > 0 => {
                // Only fails if a global pool already exists, which cannot happen here.
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
            _ => {
                eprintln!("error: SPECGAP_THREADS = `{raw}` is not a positive integer");
                return ExitCode::from(2);
            }
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_error_kind() {
        assert_eq!(CliError::from(specgap::Error::Domain("x".into())).code(), 2);
        assert_eq!(
            CliError::from(specgap::Error::InfeasibleDelta { n: 3.0, delta: 0.5 }).code(),
            2
        );
        assert_eq!(CliError::from(specgap::Error::NoConvergence("x".into())).code(), 3);
        assert_eq!(
            CliError::from(specgap::Error::HorizonReached { horizon: 1.0 }).code(),
            3
        );
    }
}
