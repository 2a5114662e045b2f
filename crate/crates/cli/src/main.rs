use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nohide_cli::commands::{
    run_compile, run_scan, run_tomo, run_verify, CompileOptions, ScanOptions, Target, TomoOptions, VerifyOptions,
};
use nohide_cli::config::RunConfig;
use nohide_cli::CliError;

/// Simulate, compile and verify the quantum no-hiding experiment.
///
/// Exit codes: 0 success, 2 configuration error, 3 verification failure, 4 I/O error.
#[derive(Parser)]
#[command(name = "nohide", version)]
struct Cli {
    /// TOML configuration with optional [spins], [noise], [grid], [analysis] and [output] sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the (theta, phi) grid and write per-spin signals as CSV.
    Scan {
        #[arg(long)]
        theta_steps: Option<usize>,
        #[arg(long)]
        phi_steps: Option<usize>,
        /// Simulate the compiled pulse program instead of the gate model.
        #[arg(long)]
        pulse_level: bool,
        /// Relative flip-angle error (requires --pulse-level).
        #[arg(long)]
        noise_sigma: Option<f64>,
        /// Output path; defaults to [output].scan, else stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check compiled sequences against their target unitaries.
    Verify {
        /// Emit a JSON report including fitted phases.
        #[arg(long)]
        json: bool,
        /// Verify this sequence listing instead of the built-in ones.
        #[arg(long)]
        sequence: Option<PathBuf>,
        /// Target for --sequence.
        #[arg(long, value_enum, default_value = "randomization")]
        target: Target,
    },
    /// Tomograph the output state for one input and write a JSON report.
    Tomo {
        /// Input polar angle, degrees.
        #[arg(long)]
        theta: f64,
        /// Input azimuth, degrees.
        #[arg(long)]
        phi: f64,
        #[arg(long)]
        noise_sigma: Option<f64>,
        /// Use the gate model instead of the pulse-level simulation.
        #[arg(long)]
        gate_level: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the pulse program for one input.
    Compile {
        #[arg(long, default_value_t = 90.0)]
        theta: f64,
        #[arg(long, default_value_t = 90.0)]
        phi: f64,
        /// Lower macros to RF pulses and delays.
        #[arg(long)]
        expand: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(bytes: &[u8], out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes).map_err(CliError::from)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = RunConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Scan { theta_steps, phi_steps, pulse_level, noise_sigma, out } => {
            let bytes = run_scan(&cfg, &ScanOptions { theta_steps, phi_steps, pulse_level, noise_sigma })?;
            emit(&bytes, out.as_deref().or(cfg.output.scan.as_deref()))
        }
        Command::Verify { json, sequence, target } => {
            let sequence = match sequence {
                Some(p) => {
                    let text = std::fs::read_to_string(&p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
                    Some((p.display().to_string(), text))
                }
                None => None,
            };
            let (bytes, ok) = run_verify(&cfg, &VerifyOptions { json, sequence, target })?;
            emit(&bytes, None)?;
            if ok {
                Ok(())
            } else {
                Err(CliError::Verification("at least one sequence is in class fail".into()))
            }
        }
        Command::Tomo { theta, phi, noise_sigma, gate_level, out } => {
            let bytes = run_tomo(&cfg, &TomoOptions { theta_deg: theta, phi_deg: phi, noise_sigma, gate_level })?;
            emit(&bytes, out.as_deref().or(cfg.output.tomo.as_deref()))
        }
        Command::Compile { theta, phi, expand, out } => {
            let bytes = run_compile(&cfg, &CompileOptions { theta_deg: theta, phi_deg: phi, expand })?;
            emit(&bytes, out.as_deref().or(cfg.output.compile.as_deref()))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nohide: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
