use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand as ClapSubcommand};

use dressedlat_cli::runner::{run, Subcommand};
use dressedlat_cli::CliError;

/// Adiabatic potentials for rf/microwave-dressed atoms in magnetic gradients:
/// potentials, 2D maps, regime diagrams, comb waveforms, moving gratings, and
/// shaped traps, from a single TOML configuration.
#[derive(Parser)]
#[command(name = "dressedlat", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, clap::Args)]
struct RunArgs {
    /// Path to the TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides config and DRESSEDLAT_OUT).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated output formats: csv, svg, raw.
    #[arg(long, value_delimiter = ',')]
    format: Option<Vec<String>>,
}

#[derive(ClapSubcommand)]
enum Command {
    /// Unfolded adiabatic potentials along a 1D gradient.
    Potentials(RunArgs),
    /// Pointwise potentials over a 2D quadrupole field.
    Map2d(RunArgs),
    /// Many-component comb potentials (same machinery as `potentials`).
    Comb(RunArgs),
    /// (Rabi frequency, lattice constant) regime classification.
    Regime(RunArgs),
    /// Frame-by-frame moving lattice under a comb ramp.
    Evolve(RunArgs),
    /// Waveform synthesis plus overall and stepwise spectra.
    Spectra(RunArgs),
    /// Microwave-dressed flat-bottom trap and its metrics.
    Shaping(RunArgs),
    /// Scalar lattice relations at one operating point.
    LatticeParams(RunArgs),
}

fn dispatch(cmd: Command) -> dressedlat_cli::Result<String> {
    let (sub, args) = match cmd {
        Command::Potentials(a) => (Subcommand::Potentials, a),
        Command::Map2d(a) => (Subcommand::Map2d, a),
        Command::Comb(a) => (Subcommand::Comb, a),
        Command::Regime(a) => (Subcommand::Regime, a),
        Command::Evolve(a) => (Subcommand::Evolve, a),
        Command::Spectra(a) => (Subcommand::Spectra, a),
        Command::Shaping(a) => (Subcommand::Shaping, a),
        Command::LatticeParams(a) => (Subcommand::LatticeParams, a),
    };
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Io(format!("cannot read {:?}: {e}", args.config)))?;
    let outcome = run(sub, &text, args.out.as_deref(), args.format)?;
    Ok(outcome.manifest)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(manifest) => {
            print!("{manifest}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
