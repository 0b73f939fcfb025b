//! `spincat` command-line front end.
//!
//! Exit codes: 0 success, 1 I/O or internal failure, 2 invalid input,
//! 3 optimizer did not reach its fidelity target.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use spincat::spinalg::SpinValue;

pub const EXIT_IO: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_NOT_CONVERGED: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "spincat", version, about = "Spin-cat qudit toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TensorBasisArg {
    /// `T^(k)_q`
    Tensor,
    /// `S^(k)_q`, q ≥ 0
    Sym,
    /// `A^(k)_q`, q > 0
    Anti,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GrapeTargetArg {
    Control,
    Target,
    RydTransfer,
    XMeasurement,
    DualX2,
    DualX3,
    DualZ,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Rotation,
    Optical,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dump a spherical tensor or S/A basis operator.
    Tensor {
        #[arg(long, default_value = "9/2")]
        spin: SpinValue,
        #[arg(long)]
        rank: u32,
        #[arg(long, allow_hyphen_values = true)]
        q: i32,
        #[arg(long, value_enum, default_value = "tensor")]
        basis: TensorBasisArg,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Knill-Laflamme scan of the repetition code against all monomials of degree ≤ K.
    Klscan {
        #[arg(long, default_value = "9/2")]
        spin: SpinValue,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long = "k")]
        k: u32,
        #[arg(long, default_value_t = spincat::catcode::KL_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Correct one optical-pumping event on the n = 3 code and print the transcript.
    SimulateEc(commands::SimulateEcArgs),
    /// Optimize a control pulse.
    Grape(commands::GrapeArgs),
    /// Logical error bound sweeps with break-even and CSS crossings.
    Threshold(commands::ThresholdArgs),
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("SPINCAT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| format!("SPINCAT_THREADS must be a positive integer, got {raw:?}"))?;
    if n == 0 {
        return Err("SPINCAT_THREADS must be positive".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_INVALID);
    }
    let result = match cli.command {
        Command::Tensor { spin, rank, q, basis, format, out } => commands::tensor(spin, rank, q, basis, format, out),
        Command::Klscan { spin, n, k, tol, out } => commands::klscan(spin, n, k, tol, out),
        Command::SimulateEc(args) => commands::simulate_ec(args),
        Command::Grape(args) => commands::grape(args),
        Command::Threshold(args) => commands::threshold(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
