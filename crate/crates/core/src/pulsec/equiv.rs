//! Equivalence of compiled sequences to target unitaries, modulo phases that
//! are free in an NMR experiment.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{sequence_unitary, Mode, PulseSequence, SpinSystem};
use crate::error::{Error, Result};
use crate::qstate::{equal_up_to_global_phase, ComplexMatrix, DensityMatrix, StateVector, C64};

/// Residual above which every class fails.
pub const EQUIVALENCE_TOL: f64 = 1e-6;

const RESTARTS: usize = 8;
const SWEEPS: usize = 400;
const FIT_SEED: u64 = 0x7a_7068_6173;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquivalenceClass {
    /// `U = T`.
    Exact,
    /// `U = e^{iγ} T`.
    GlobalPhase,
    /// `U = e^{iγ} D_L T D_R` with `D` products of single-spin z-rotations.
    LocalZPhase,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub class: EquivalenceClass,
    /// Max-entry residual of the best fit in the reported class (or the
    /// weakest class tried, on failure).
    pub residual: f64,
    pub global_phase: f64,
    /// z-rotation angles `α_s` of `D_L` then `D_R`, each `exp(−iα_s I_sz)`;
    /// empty unless the class is [`EquivalenceClass::LocalZPhase`].
    pub fitted_phases: Vec<f64>,
}

/// `exp(−i Σ_s α_s I_sz)` as a diagonal.
fn z_diagonal(angles: &[f64]) -> Vec<C64> {
    let n = angles.len();
    (0..1usize << n)
        .map(|b| {
            let phase: f64 = (1..=n)
                .map(|s| if b >> (n - s) & 1 == 0 { -angles[s - 1] / 2.0 } else { angles[s - 1] / 2.0 })
                .sum();
            C64::from_polar(1.0, phase)
        })
        .collect()
}

fn sandwich(t: &ComplexMatrix, left: &[C64], right: &[C64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(t.rows(), t.cols(), |r, c| left[r] * t.get(r, c) * right[c])
}

fn bit_is_zero(b: usize, s: usize, n: usize) -> bool {
    b >> (n - s) & 1 == 0
}

/// Fits `U ≈ e^{iγ} D_L T D_R` by exact coordinate ascent on `|Tr(W† U)|`
/// with `W = D_L T D_R`, from several seeded starting points.
fn fit_local_z(u: &ComplexMatrix, t: &ComplexMatrix, n: usize) -> (f64, f64, Vec<f64>) {
    let dim = 1usize << n;
    let mut rng = ChaCha8Rng::seed_from_u64(FIT_SEED);
    let mut best = (f64::INFINITY, 0.0, vec![0.0; 2 * n]);
    for restart in 0..RESTARTS {
        let mut ang: Vec<f64> = if restart == 0 {
            vec![0.0; 2 * n]
        } else {
            (0..2 * n).map(|_| rng.random_range(-PI..PI)).collect()
        };
        for _ in 0..SWEEPS {
            let before = ang.clone();
            for k in 0..2 * n {
                let (left_side, s) = if k < n { (true, k + 1) } else { (false, k - n + 1) };
                let mut probe = ang.clone();
                probe[k] = 0.0;
                let dl = z_diagonal(&probe[..n]);
                let dr = z_diagonal(&probe[n..]);
                // overlap = c₊ e^{iα/2} + c₋ e^{−iα/2}, split by the spin's bit
                let (mut cp, mut cm) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
                for r in 0..dim {
                    for c in 0..dim {
                        let term = (dl[r] * t.get(r, c) * dr[c]).conj() * u.get(r, c);
                        let zero = if left_side { bit_is_zero(r, s, n) } else { bit_is_zero(c, s, n) };
                        if zero {
                            cp += term;
                        } else {
                            cm += term;
                        }
                    }
                }
                // |cp e^{iα/2} + cm e^{−iα/2}| is largest at α = arg cm − arg cp
                ang[k] = if cp.norm() == 0.0 || cm.norm() == 0.0 { 0.0 } else { cm.arg() - cp.arg() };
            }
            let moved = ang.iter().zip(&before).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if moved < 1e-15 {
                break;
            }
        }
        let w = sandwich(t, &z_diagonal(&ang[..n]), &z_diagonal(&ang[n..]));
        let overlap: C64 = (0..dim * dim).map(|k| w.as_slice()[k].conj() * u.as_slice()[k]).sum();
        let gamma = overlap.arg();
        let residual = u.max_abs_diff(&w.scale(C64::from_polar(1.0, gamma)));
        if residual < best.0 {
            best = (residual, gamma, ang);
        }
    }
    best
}

/// Classifies `U` relative to `target`, trying the classes from strictest to loosest.
pub fn classify(u: &ComplexMatrix, target: &ComplexMatrix) -> Result<EquivalenceReport> {
    if u.rows() != target.rows() || u.cols() != target.cols() || !u.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            u.rows(),
            u.cols(),
            target.rows(),
            target.cols()
        )));
    }
    let exact = u.max_abs_diff(target);
    if exact <= EQUIVALENCE_TOL {
        return Ok(EquivalenceReport { class: EquivalenceClass::Exact, residual: exact, global_phase: 0.0, fitted_phases: vec![] });
    }
    let g = equal_up_to_global_phase(u, target, EQUIVALENCE_TOL)?;
    if g.equal {
        return Ok(EquivalenceReport {
            class: EquivalenceClass::GlobalPhase,
            residual: g.residual,
            global_phase: g.phase,
            fitted_phases: vec![],
        });
    }
    let n = u.rows().trailing_zeros() as usize;
    let (residual, gamma, angles) = fit_local_z(u, target, n);
    let class = if residual <= EQUIVALENCE_TOL { EquivalenceClass::LocalZPhase } else { EquivalenceClass::Fail };
    Ok(EquivalenceReport { class, residual, global_phase: gamma, fitted_phases: angles })
}

/// Compares a sequence's propagator with `target`.
pub fn verify_equivalence(seq: &PulseSequence, target: &ComplexMatrix, sys: &SpinSystem, mode: Mode) -> Result<EquivalenceReport> {
    let u = sequence_unitary(seq, sys, mode)?;
    classify(&u, target)
}

/// Outcome of [`fit_state_z_phases`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFit {
    pub fidelity: f64,
    /// Angles `α_s`; the fitted state is `D ρ D†` with `D = exp(−i Σ α_s I_sz)`.
    pub phases: Vec<f64>,
}

/// Maximizes `⟨ψ| D ρ D† |ψ⟩` over per-spin z-rotations `D`.
pub fn fit_state_z_phases(target: &StateVector, rho: &DensityMatrix) -> Result<StateFit> {
    let n = rho.n_qubits();
    if target.n_qubits() != n {
        return Err(Error::DimensionMismatch(format!("{}-qubit target, {n}-qubit state", target.n_qubits())));
    }
    let dim = 1usize << n;
    let psi = target.amplitudes();
    let fidelity = |ang: &[f64]| -> f64 {
        let d = z_diagonal(ang);
        let mut f = C64::new(0.0, 0.0);
        for r in 0..dim {
            for c in 0..dim {
                f += psi[r].conj() * d[r] * rho.get(r, c) * d[c].conj() * psi[c];
            }
        }
        f.re
    };
    let mut rng = ChaCha8Rng::seed_from_u64(FIT_SEED);
    let mut best = StateFit { fidelity: f64::NEG_INFINITY, phases: vec![0.0; n] };
    for restart in 0..RESTARTS {
        let mut ang: Vec<f64> =
            if restart == 0 { vec![0.0; n] } else { (0..n).map(|_| rng.random_range(-PI..PI)).collect() };
        for _ in 0..SWEEPS {
            let before = ang.clone();
            for s in 1..=n {
                let mut probe = ang.clone();
                probe[s - 1] = 0.0;
                let d = z_diagonal(&probe);
                // F(α) = A + 2 Re(B e^{−iα}); B collects |0⟩⟨1| terms of spin s
                let mut b = C64::new(0.0, 0.0);
                for r in (0..dim).filter(|&r| bit_is_zero(r, s, n)) {
                    for c in (0..dim).filter(|&c| !bit_is_zero(c, s, n)) {
                        b += psi[r].conj() * d[r] * rho.get(r, c) * d[c].conj() * psi[c];
                    }
                }
                ang[s - 1] = if b.norm() == 0.0 { ang[s - 1] } else { b.arg() };
            }
            let moved = ang.iter().zip(&before).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if moved < 1e-15 {
                break;
            }
        }
        let f = fidelity(&ang);
        if f > best.fidelity {
            best = StateFit { fidelity: f, phases: ang };
        }
    }
    best.fidelity = best.fidelity.clamp(0.0, 1.0);
    Ok(best)
}
