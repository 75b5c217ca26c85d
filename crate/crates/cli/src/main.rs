use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sdswe::dissipation::DissipationMode;
use sdswe_cli::run::{cmd_run, RunOptions};
use sdswe_cli::studies::{
    commutator_csv, convergence_commutator, convergence_energy, energy_csv, loglog_slope, orders,
    spectra_from_checkpoints, spectrum_csv, Domain,
};
use sdswe_cli::CliError;

#[derive(Parser)]
#[command(name = "sdswe", version, about = "Selective-decay shallow-water solver on triangular meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a configured case.
    Run {
        /// TOML configuration, or a manifest.json from an earlier run.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the dissipation mode of the configuration.
        #[arg(long)]
        mode: Option<DissipationMode>,
        /// Continue from a checkpoint written by the same configuration.
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Record that bit-identical output is required. Execution is always serial.
        #[arg(long)]
        deterministic: bool,
    },
    /// Error of the discrete commutator under mesh refinement.
    ConvergenceCommutator {
        #[arg(long, value_enum, default_value = "plane")]
        domain: Domain,
        #[arg(long, default_value_t = 3)]
        levels: u32,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Energy error of the vortex case against the time step.
    ConvergenceEnergy {
        #[arg(long, default_value = "vortex")]
        case: String,
        /// Time steps in seconds.
        #[arg(long, value_delimiter = ',', default_values_t = [900.0, 1800.0, 3600.0])]
        dts: Vec<f64>,
        /// Lattice size; the mesh has 2·nx² triangles.
        #[arg(long, default_value_t = 32)]
        nx: usize,
        #[arg(long, default_value_t = 2.0)]
        days: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Energy and enstrophy spectra, averaged over one or more checkpoints.
    Spectra {
        #[arg(long, required = true)]
        checkpoint: Vec<PathBuf>,
        #[arg(long, default_value_t = 128)]
        grid: usize,
        #[arg(long, default_value = "spectrum.csv")]
        out: PathBuf,
    },
}

fn emit(out: Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => Ok(fs::write(path, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, out, mode, resume, deterministic } => {
            let summary = cmd_run(&config, &out, &RunOptions { mode, resume, deterministic })?;
            let last = summary.records.last().expect("initial record");
            eprintln!(
                "{} steps to t = {:.1} s; energy {:+.3e}, enstrophy {:+.3e}, mass {:+.3e} relative",
                summary.steps, last.t, last.energy_rel_err, last.enstrophy_rel_err, last.mass_rel_err
            );
        }
        Command::ConvergenceCommutator { domain, levels, out } => {
            let rows = convergence_commutator(domain, levels)?;
            emit(out, &commutator_csv(&rows))?;
            let cells: Vec<usize> = rows.iter().map(|r| r.cells).collect();
            let l2: Vec<f64> = rows.iter().map(|r| r.l2).collect();
            let linf: Vec<f64> = rows.iter().map(|r| r.linf).collect();
            eprintln!("L2 orders {:?}, Linf orders {:?}", orders(&cells, &l2), orders(&cells, &linf));
        }
        Command::ConvergenceEnergy { case, dts, nx, days, out } => {
            if case != "vortex" {
                return Err(sdswe_cli::config::ConfigError(format!("unknown case `{case}` (expected vortex)")).into());
            }
            let rows = convergence_energy(nx, days * sdswe::cases::DAY, &dts)?;
            emit(out, &energy_csv(&rows))?;
            if rows.len() > 1 {
                let (dt, err): (Vec<f64>, Vec<f64>) = rows.iter().copied().unzip();
                eprintln!("log-log slope {:.3}", loglog_slope(&dt, &err));
            }
        }
        Command::Spectra { checkpoint, grid, out } => {
            let paths: Vec<&std::path::Path> = checkpoint.iter().map(|p| p.as_path()).collect();
            let s = spectra_from_checkpoints(&paths, grid)?;
            fs::write(out, spectrum_csv(&s))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
