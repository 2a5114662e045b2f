//! Subcommand implementations. Each returns the bytes it would print or write,
//! so the binary only decides where they go.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use nohide::circuit::{cnot, recovery_unitary, randomization_unitary};
use nohide::experiment::{scan, tomography, Level};
use nohide::nmrsim::Receiver;
use nohide::pulsec::{
    compile_cnot23, compile_full, compile_randomization, compile_report, expand_macros, parse_sequence, pseudo_hadamard_phase,
    render_sequence, rf_unitary, verify_equivalence, EquivalenceClass, EquivalenceReport, Mode, PulseSequence,
};
use nohide::ComplexMatrix;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::output::{scan_rows, write_json, write_scan};
use crate::CliError;

pub struct ScanOptions {
    pub theta_steps: Option<usize>,
    pub phi_steps: Option<usize>,
    pub pulse_level: bool,
    pub noise_sigma: Option<f64>,
}

pub fn run_scan(cfg: &RunConfig, opts: &ScanOptions) -> Result<Vec<u8>, CliError> {
    let grid = cfg.grid(opts.theta_steps, opts.phi_steps)?;
    let level = if opts.pulse_level {
        Level::Pulse { sys: cfg.spin_system()?, noise: cfg.noise_model(opts.noise_sigma)? }
    } else {
        if opts.noise_sigma.is_some_and(|s| s != 0.0) {
            return Err(CliError::Config("--noise-sigma needs --pulse-level".into()));
        }
        Level::Gate
    };
    let receiver = Receiver::standard(cfg.analysis.receiver);
    let records = scan(&grid, &level, &receiver)?;
    let mut buf = Vec::new();
    write_scan(&mut buf, &scan_rows(&grid.points(), &records))?;
    Ok(buf)
}

/// Which target a user-supplied sequence is checked against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Randomization,
    Cnot23,
    Full,
}

/// Gate-level unitary of the whole experiment for input angles `(θ, φ)`,
/// with the ancilla preparation written as the same `[π/2]` pulses the
/// compiler emits.
pub fn full_target(theta: f64, phi: f64) -> ComplexMatrix {
    let prep = rf_unitary(&[1], theta, phi, 3).expect("spin 1");
    let anc = rf_unitary(&[2, 3], FRAC_PI_2, pseudo_hadamard_phase(), 3).expect("spins 2, 3");
    &(&recovery_unitary() * &randomization_unitary()) * &(&anc * &prep)
}

impl Target {
    pub fn unitary(self) -> ComplexMatrix {
        match self {
            Self::Randomization => randomization_unitary(),
            Self::Cnot23 => cnot(2, 3, 3).expect("three qubits"),
            Self::Full => full_target(FRAC_PI_2, FRAC_PI_2),
        }
    }

    pub fn sequence(self) -> PulseSequence {
        match self {
            Self::Randomization => compile_randomization(),
            Self::Cnot23 => compile_cnot23(),
            Self::Full => compile_full(FRAC_PI_2, FRAC_PI_2),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Randomization => "randomization",
            Self::Cnot23 => "cnot23",
            Self::Full => "full",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyRow {
    pub sequence: String,
    pub target: Target,
    pub mode: Mode,
    pub report: EquivalenceReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutput {
    pub rows: Vec<VerifyRow>,
    pub all_passed: bool,
}

pub struct VerifyOptions {
    pub json: bool,
    /// Replacement listing checked against `target` instead of the built-in sequences.
    pub sequence: Option<(String, String)>,
    pub target: Target,
}

/// Returns the rendered report and whether every row passed.
pub fn run_verify(cfg: &RunConfig, opts: &VerifyOptions) -> Result<(Vec<u8>, bool), CliError> {
    let sys = cfg.spin_system()?;
    let cases: Vec<(String, PulseSequence, Target)> = match &opts.sequence {
        Some((name, text)) => vec![(name.clone(), parse_sequence(text)?, opts.target)],
        None => [Target::Randomization, Target::Cnot23, Target::Full]
            .into_iter()
            .map(|t| (t.name().to_string(), t.sequence(), t))
            .collect(),
    };
    let mut rows = Vec::new();
    for (name, seq, target) in cases {
        for mode in [Mode::Ideal, Mode::Physical] {
            let report = verify_equivalence(&seq, &target.unitary(), &sys, mode)?;
            rows.push(VerifyRow { sequence: name.clone(), target, mode, report });
        }
    }
    let all_passed = rows.iter().all(|r| r.report.class != EquivalenceClass::Fail);
    let out = VerifyOutput { rows, all_passed };
    let mut buf = Vec::new();
    if opts.json {
        write_json(&mut buf, &out)?;
    } else {
        buf.extend(verify_table(&out).into_bytes());
    }
    Ok((buf, all_passed))
}

fn verify_table(out: &VerifyOutput) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<16} {:<14} {:<9} {:<14} {:>10}", "sequence", "target", "mode", "class", "residual");
    for r in &out.rows {
        let _ = writeln!(
            s,
            "{:<16} {:<14} {:<9} {:<14} {:>10.2e}",
            r.sequence,
            r.target.name(),
            format!("{:?}", r.mode).to_lowercase(),
            serde_json::to_value(r.report.class).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
            r.report.residual
        );
    }
    s
}

pub struct TomoOptions {
    pub theta_deg: f64,
    pub phi_deg: f64,
    pub noise_sigma: Option<f64>,
    pub gate_level: bool,
}

pub fn run_tomo(cfg: &RunConfig, opts: &TomoOptions) -> Result<Vec<u8>, CliError> {
    let level = if opts.gate_level {
        if opts.noise_sigma.is_some_and(|s| s != 0.0) {
            return Err(CliError::Config("--noise-sigma has no effect with --gate-level".into()));
        }
        Level::Gate
    } else {
        Level::Pulse { sys: cfg.spin_system()?, noise: cfg.noise_model(opts.noise_sigma)? }
    };
    if !opts.theta_deg.is_finite() || !opts.phi_deg.is_finite() {
        return Err(CliError::Config("angles must be finite".into()));
    }
    let result = tomography(opts.theta_deg.to_radians(), opts.phi_deg.to_radians(), &level, cfg.analysis.deviation)?;
    let mut buf = Vec::new();
    write_json(&mut buf, &result)?;
    Ok(buf)
}

pub struct CompileOptions {
    pub theta_deg: f64,
    pub phi_deg: f64,
    pub expand: bool,
}

pub fn run_compile(cfg: &RunConfig, opts: &CompileOptions) -> Result<Vec<u8>, CliError> {
    let sys = cfg.spin_system()?;
    let seq = compile_full(opts.theta_deg.to_radians(), opts.phi_deg.to_radians());
    let report = compile_report(&seq, &sys)?;
    let listing = if opts.expand { expand_macros(&seq, &sys)? } else { seq };
    let mut s = String::new();
    let _ = writeln!(s, "# input theta={}deg phi={}deg", opts.theta_deg, opts.phi_deg);
    let _ = writeln!(
        s,
        "# {} macro elements, {} after expansion, {} rf pulses, {} ms free precession",
        report.macro_elements,
        report.expanded_elements,
        report.rf_pulses,
        report.total_delay_s * 1e3
    );
    let _ = writeln!(s, "# ancilla preparation pulse phase {}deg", report.pseudo_hadamard_phase_deg);
    s.push_str(&render_sequence(&listing));
    Ok(s.into_bytes())
}
