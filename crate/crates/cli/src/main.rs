use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use dioph_cli::{execute, replay, resolve, CliError, Flags};

#[derive(Parser)]
#[command(name = "dioph", version, about = "Diophantine approximation experiments on affine coordinate subspaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count q in (M, N] with ‖q·x‖ < δ, or block counts along k^j.
    Count(Flags),
    /// Partial sums of Σ ψ(q)^k over q with ‖q·x‖ < ψ(q).
    Series(Flags),
    /// Dual or simultaneous exponent estimate.
    Exponent(Flags),
    /// Khintchine transference sandwich between ω_D and ω_S.
    Transference(Flags),
    /// Witnesses of very well approximability.
    Vwa(Flags),
    /// Lattice g_t u_x Z^(ℓ+1): point count and dual short vector.
    Lattice(Flags),
    /// The 4^(ℓ+1)·N·δ^ℓ upper bound.
    Nalpha(Flags),
    /// The Minkowski covering of [0,1].
    Cover(Flags),
    /// Conditions (U), (R), (D) along k^j.
    Ubiquity(Flags),
    /// Search for a block base k satisfying (U).
    #[command(name = "select-k")]
    SelectK(Flags),
    /// Fraction of sampled fiber points that are ψ-approximable.
    Measure(Flags),
    /// Convergent φ contrast with its union bound.
    #[command(name = "phi-contrast")]
    PhiContrast(Flags),
    /// Fraction on {x} × [0,1]^k for k ≥ 2, with the partial series.
    Subspace(Flags),
    /// Re-execute a recorded result and compare bytes.
    Replay { path: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = match cli.command {
        Command::Replay { path } => replay(&path).map(|_| {
            println!("identical: {path}");
        }),
        cmd => {
            let (name, flags) = match cmd {
                Command::Count(f) => ("count", f),
                Command::Series(f) => ("series", f),
                Command::Exponent(f) => ("exponent", f),
                Command::Transference(f) => ("transference", f),
                Command::Vwa(f) => ("vwa", f),
                Command::Lattice(f) => ("lattice", f),
                Command::Nalpha(f) => ("nalpha", f),
                Command::Cover(f) => ("cover", f),
                Command::Ubiquity(f) => ("ubiquity", f),
                Command::SelectK(f) => ("select-k", f),
                Command::Measure(f) => ("measure", f),
                Command::PhiContrast(f) => ("phi-contrast", f),
                Command::Subspace(f) => ("subspace", f),
                Command::Replay { .. } => unreachable!(),
            };
            run_one(name, &flags)
        }
    };
    eprintln!("wall time: {:.3}s", start.elapsed().as_secs_f64());
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run_one(name: &str, flags: &Flags) -> Result<(), CliError> {
    let r = resolve(name, flags)?;
    let out = execute(&r)?;
    if r.output.is_none() {
        let bytes = out.primary_bytes()?;
        std::io::stdout().write_all(&bytes).map_err(|e| CliError::Io(e.to_string()))?;
    }
    Ok(())
}
