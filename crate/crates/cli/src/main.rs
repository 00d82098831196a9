use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ptsym_core::Complex64;

mod commands;
mod config;
mod error;
mod io;

use config::{parse_complex, GridFlags, TolFlags};

/// PT-symmetric Hamiltonians: classification, metric operators, invariants
/// and embeddings.
#[derive(Debug, Parser)]
#[command(name = "ptsym", version, about)]
struct Cli {
    /// JSON run configuration (tolerances, grid, signs, probe).
    #[arg(long, global = true, env = "PTSYM_CONFIG")]
    config: Option<PathBuf>,

    #[command(flatten)]
    tols: TolFlags,

    #[command(subcommand)]
    command: Command,
}

/// Hamiltonian plus its (P, T) pair.
#[derive(Debug, Clone, Args)]
struct SystemArgs {
    #[arg(long)]
    hamiltonian: PathBuf,
    #[arg(long)]
    parity: PathBuf,
    #[arg(long)]
    time_reversal: PathBuf,
}

#[derive(Debug, Clone, Args)]
struct OptionalSystem {
    #[arg(long)]
    hamiltonian: Option<PathBuf>,
    #[arg(long, requires = "hamiltonian")]
    parity: Option<PathBuf>,
    #[arg(long, requires = "hamiltonian")]
    time_reversal: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Report PT-symmetry residual, spectral class and block structure.
    Classify {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Emit the canonical similarity Ψ, the real Jordan form J and K = PT in that frame.
    Canonical {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build the metric operator η for a sign characteristic.
    Metric {
        #[command(flatten)]
        system: SystemArgs,
        /// Comma-separated ±1 per real block (default all +1).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        signs: Option<Vec<i8>>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// η-inner product ⟨φ₁|φ₂⟩_η = φ₁†ηφ₂.
    Inner {
        #[arg(long)]
        phi1: PathBuf,
        #[arg(long)]
        phi2: PathBuf,
        /// Metric in matrix-file format; otherwise built from the Hamiltonian.
        #[arg(long, conflicts_with = "hamiltonian")]
        eta: Option<PathBuf>,
        #[command(flatten)]
        system: OptionalSystem,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        signs: Option<Vec<i8>>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// ρ(t) = U(t)ρU†(t) with U(t) = exp(−iHt).
    Evolve {
        #[arg(long)]
        hamiltonian: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        /// Divide by the trace of the evolved state.
        #[arg(long)]
        normalize: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// CSV of canonical-frame coefficients and Tr(ηρ) over a time grid.
    Invariants {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        state: PathBuf,
        #[command(flatten)]
        grid: GridFlags,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        signs: Option<Vec<i8>>,
        /// CSV destination (stdout by default).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Drift summary (default `<output>.summary.json`, stderr when writing to stdout).
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Sweep θ for H = [[r e^{iθ}, s], [s, r e^{−iθ}]].
    BenderSweep {
        #[arg(long)]
        r: f64,
        #[arg(long)]
        s: f64,
        #[arg(long, allow_hyphen_values = true)]
        theta_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        theta_max: f64,
        #[arg(long, default_value_t = 101)]
        steps: usize,
        /// Probe amplitude E_x as `re` or `re,im`.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        probe_x: Option<Complex64>,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        probe_y: Option<Complex64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Stokes parameters of (E_x, E_y); with --alpha also the η-norm S₀.
    Stokes {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        ex: Complex64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        ey: Complex64,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Simulate the evolution inside a unitary dilation and post-select.
    Dilate {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        state: PathBuf,
        #[command(flatten)]
        grid: GridFlags,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Superposition-free states, free Kraus operators and free evolutions.
    FreeCheck {
        #[command(flatten)]
        system: OptionalSystem,
        /// Basis vectors as the columns of a matrix file.
        #[arg(long)]
        basis: Option<PathBuf>,
        /// Require an orthonormal basis (incoherence check).
        #[arg(long)]
        orthonormal: bool,
        #[arg(long)]
        state: Option<PathBuf>,
        #[arg(long)]
        kraus: Option<PathBuf>,
        /// Scale c of the evolution c·U(t) (default: the uniform bound).
        #[arg(long)]
        scale: Option<f64>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[command(flatten)]
        grid: GridFlags,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", io::compact_json(&e.to_json()));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
