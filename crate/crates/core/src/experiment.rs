//! End-to-end runs: grid sweeps of observed signals and tomography of the
//! output state, at gate level or through the pulse-level simulator.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{ancilla_state, bell_phi_plus, expected_output, prepare_psi, run_protocol, Grid};
use crate::error::Result;
use crate::nmrsim::{observe, ObservationRecord, Receiver, Stage};
use crate::pulsec::{compile_full, expand_macros, simulate_physical, NoiseModel, PulseSequence, SpinSystem};
use crate::qstate::{partial_trace, DensityMatrix, StateVector};
use crate::tomo::{
    deviation_report, deviation_report_parts, pauli_expectations, reconstruct, DensityMatrixJson, DeviationMetric,
    DeviationReport,
};

/// Initial and final density matrices of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunStates {
    pub input: DensityMatrix,
    pub output: DensityMatrix,
}

/// Gate-level input `|ψ⟩|00⟩` (observed before the ancilla is prepared) and
/// the recovered state.
pub fn gate_states(theta: f64, phi: f64) -> RunStates {
    let rec = run_protocol(theta, phi);
    let zeros = StateVector::basis(2, 0).expect("two qubits");
    RunStates { input: prepare_psi(theta, phi).tensor(&zeros).projector(), output: rec.output_state.projector() }
}

/// Pulse-level states from `|000⟩`: after the `(θ)_φ` pulse and after the
/// whole program.
pub fn pulse_states(theta: f64, phi: f64, sys: &SpinSystem, noise: &NoiseModel) -> Result<RunStates> {
    let full = expand_macros(&compile_full(theta, phi), sys)?;
    // the crusher and the input pulse come first
    let prep = PulseSequence::new(full.elements[..2].to_vec());
    let ground = StateVector::basis(sys.n_spins(), 0)?.projector();
    Ok(RunStates {
        input: simulate_physical(&prep, &ground, sys, noise)?,
        output: simulate_physical(&full, &ground, sys, noise)?,
    })
}

/// Where a sweep gets its states.
#[derive(Clone, Debug, PartialEq)]
pub enum Level {
    Gate,
    Pulse { sys: SpinSystem, noise: NoiseModel },
}

impl Level {
    pub fn states(&self, theta: f64, phi: f64) -> Result<RunStates> {
        match self {
            Self::Gate => Ok(gate_states(theta, phi)),
            Self::Pulse { sys, noise } => pulse_states(theta, phi, sys, noise),
        }
    }
}

/// Observation records ordered by θ, φ, stage (input first), spin.
pub fn scan(grid: &Grid, level: &Level, receiver: &Receiver) -> Result<Vec<ObservationRecord>> {
    let per_point: Vec<Result<Vec<ObservationRecord>>> = grid
        .points()
        .par_iter()
        .map(|p| {
            let (t, f) = (p.theta(), p.phi());
            let states = level.states(t, f)?;
            let mut recs = observe(&states.input, receiver, Stage::Input, t, f)?;
            recs.extend(observe(&states.output, receiver, Stage::Output, t, f)?);
            Ok(recs)
        })
        .collect();
    let mut out = Vec::with_capacity(grid.len() * 6);
    for r in per_point {
        out.extend(r?);
    }
    Ok(out)
}

/// `|ψ⟩|A⟩`, the state entering the randomization.
pub fn ideal_input(theta: f64, phi: f64) -> DensityMatrix {
    prepare_psi(theta, phi).tensor(&ancilla_state()).projector()
}

/// Tomography of the output state and its comparison with the ideal output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TomographyResult {
    pub theta_deg: f64,
    pub phi_deg: f64,
    pub reconstructed: DensityMatrixJson,
    pub marginal_12: DensityMatrixJson,
    pub marginal_3: DensityMatrixJson,
    pub deviation: DeviationReport,
    /// Real-part and imaginary-part reports, present with [`DeviationMetric::RealImag`].
    pub deviation_real_imag: Option<(DeviationReport, DeviationReport)>,
    pub avg_deviation_percent: f64,
    pub max_deviation_percent: f64,
    /// Deviation of the 1–2 marginal from `|Φ⁺⟩⟨Φ⁺|`.
    pub bell_deviation: DeviationReport,
    pub min_eigenvalue: f64,
}

pub fn tomography(theta: f64, phi: f64, level: &Level, metric: DeviationMetric) -> Result<TomographyResult> {
    let out = level.states(theta, phi)?.output;
    let rho = reconstruct(&pauli_expectations(&out))?;
    let theory = expected_output(theta, phi);
    let m12 = partial_trace(&rho, &[1, 2])?;
    let m3 = partial_trace(&rho, &[3])?;
    let deviation = deviation_report(theory.matrix(), rho.matrix())?;
    let deviation_real_imag = match metric {
        DeviationMetric::Modulus => None,
        DeviationMetric::RealImag => Some(deviation_report_parts(theory.matrix(), rho.matrix())?),
    };
    let bell_deviation = deviation_report(bell_phi_plus().projector().matrix(), m12.matrix())?;
    Ok(TomographyResult {
        theta_deg: theta.to_degrees(),
        phi_deg: phi.to_degrees(),
        reconstructed: (&rho).into(),
        marginal_12: (&m12).into(),
        marginal_3: (&m3).into(),
        deviation,
        deviation_real_imag,
        avg_deviation_percent: 100.0 * deviation.avg_abs_dev,
        max_deviation_percent: 100.0 * deviation.max_abs_dev,
        bell_deviation,
        min_eigenvalue: rho.min_eigenvalue(),
    })
}

/// Total free-precession time of the compiled experiment, s.
pub fn total_sequence_time(sys: &SpinSystem) -> Result<f64> {
    Ok(expand_macros(&compile_full(0.0, 0.0), sys)?.total_delay())
}
