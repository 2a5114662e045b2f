//! Ideal and physical propagation of pulse sequences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{expand_cnot, expand_macros, PulseElement, PulseSequence, SpinSystem};
use crate::error::{Error, Result};
use crate::qstate::ops::{self, left_multiply_local, rotation};
use crate::qstate::{total_coherence_order, ComplexMatrix, DensityMatrix, C64};

/// How [`sequence_unitary`] treats free evolution and macros.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Macros act as their exact target operators; delays evolve under the
    /// couplings only, with every offset set to zero.
    Ideal,
    /// Macros are expanded and delays include offsets and couplings.
    Physical,
}

/// Pulse imperfections and relaxation for [`simulate_physical`].
///
/// Each RF channel `k` (one per spin) carries a fixed miscalibration `c_k`,
/// and each ensemble member `m` sees an inhomogeneity factor `h_m`; both are
/// standard normal draws from `seed`. Every flip angle on spin `k` in member
/// `m` is scaled by `(1 + σ c_k)(1 + σ h_m)`. A single-member ensemble uses
/// `h = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub calibration_sigma: f64,
    pub inhomogeneity_samples: usize,
    pub t2_enabled: bool,
    pub seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::noiseless()
    }
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self { calibration_sigma: 0.0, inhomogeneity_samples: 1, t2_enabled: false, seed: 0 }
    }

    pub fn new(calibration_sigma: f64, inhomogeneity_samples: usize, t2_enabled: bool, seed: u64) -> Result<Self> {
        let m = Self { calibration_sigma, inhomogeneity_samples, t2_enabled, seed };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.calibration_sigma >= 0.0 && self.calibration_sigma.is_finite()) {
            return Err(Error::InvalidNoise(format!(
                "calibration_sigma must be finite and non-negative, got {}",
                self.calibration_sigma
            )));
        }
        if self.inhomogeneity_samples == 0 {
            return Err(Error::InvalidNoise("ensemble size must be at least 1".into()));
        }
        Ok(())
    }

    /// Flip-angle scale factors, `[member][spin − 1]`.
    pub fn scale_factors(&self, n_spins: usize) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let sigma = self.calibration_sigma;
        let channel: Vec<f64> = (0..n_spins).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        (0..self.inhomogeneity_samples)
            .map(|_| {
                let h: f64 = if self.inhomogeneity_samples == 1 { 0.0 } else { rng.sample(StandardNormal) };
                channel.iter().map(|c| (1.0 + sigma * c) * (1.0 + sigma * h)).collect()
            })
            .collect()
    }
}

/// Zeeman quantum number `m = ±½` of `spin` in basis state `index`.
fn m_of(index: usize, spin: usize, n: usize) -> f64 {
    if index >> (n - spin) & 1 == 0 {
        0.5
    } else {
        -0.5
    }
}

/// Eigenvalues of `H/ħ` in rad/s for each basis state.
fn free_energies(sys: &SpinSystem, with_offsets: bool) -> Vec<f64> {
    let n = sys.n_spins();
    (0..1usize << n)
        .map(|b| {
            let mut e = 0.0;
            for s in 1..=n {
                if with_offsets {
                    e += sys.offset(s) * m_of(b, s, n);
                }
                for t in s + 1..=n {
                    e += sys.coupling(s, t) * m_of(b, s, n) * m_of(b, t, n);
                }
            }
            2.0 * PI * e
        })
        .collect()
}

fn diag_left_multiply(u: &mut ComplexMatrix, phases: &[C64]) {
    for (r, p) in phases.iter().enumerate() {
        for c in 0..u.cols() {
            let v = u.get(r, c);
            u.set(r, c, p * v);
        }
    }
}

fn zz_phases(i: usize, j: usize, n: usize) -> Vec<C64> {
    // exp(−iπ I_iz I_jz)
    (0..1usize << n)
        .map(|b| C64::from_polar(1.0, -PI * m_of(b, i, n) * m_of(b, j, n)))
        .collect()
}

fn apply_unitary_element(u: &mut ComplexMatrix, e: &PulseElement, sys: &SpinSystem, energies: &[f64]) -> Result<()> {
    let n = sys.n_spins();
    match e {
        PulseElement::Rf { spins, flip, phase } => {
            let r = rotation(*flip, *phase);
            for &s in spins {
                left_multiply_local(u, &r, s, n);
            }
        }
        PulseElement::Delay { duration } => {
            let ph: Vec<C64> = energies.iter().map(|w| C64::from_polar(1.0, -w * duration)).collect();
            diag_left_multiply(u, &ph);
        }
        PulseElement::Gradient => {}
        PulseElement::JBlock { i, j } => {
            if sys.coupling(*i, *j) == 0.0 {
                return Err(Error::ZeroCoupling(*i, *j));
            }
            diag_left_multiply(u, &zz_phases(*i, *j, n));
        }
        PulseElement::ZRot { spin, angle } => {
            let z = ops::z_phases(*angle);
            left_multiply_local(u, &[[z[0], C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), z[1]]], *spin, n);
        }
        PulseElement::Cnot { control, target } => {
            for inner in expand_cnot(*control, *target) {
                apply_unitary_element(u, &inner, sys, energies)?;
            }
        }
    }
    Ok(())
}

/// Propagator of a noiseless sequence, earliest element rightmost.
///
/// The gradient acts as the identity here since it is not unitary.
pub fn sequence_unitary(seq: &PulseSequence, sys: &SpinSystem, mode: Mode) -> Result<ComplexMatrix> {
    let n = sys.n_spins();
    for e in &seq.elements {
        e.validate(n)?;
    }
    let (seq, energies) = match mode {
        Mode::Ideal => (seq.clone(), free_energies(sys, false)),
        Mode::Physical => (expand_macros(seq, sys)?, free_energies(sys, true)),
    };
    let mut u = ComplexMatrix::identity(1 << n);
    for e in &seq.elements {
        apply_unitary_element(&mut u, e, sys, &energies)?;
    }
    Ok(u)
}

fn pairwise_sum(items: &[ComplexMatrix]) -> ComplexMatrix {
    match items.len() {
        1 => items[0].clone(),
        len => {
            let (a, b) = items.split_at(len / 2);
            &pairwise_sum(a) + &pairwise_sum(b)
        }
    }
}

fn evolve_member(seq: &PulseSequence, rho0: &ComplexMatrix, sys: &SpinSystem, t2_on: bool, scale: &[f64], energies: &[f64]) -> ComplexMatrix {
    let n = sys.n_spins();
    let dim = 1usize << n;
    let mut rho = rho0.clone();
    for e in &seq.elements {
        match e {
            PulseElement::Rf { spins, flip, phase } => {
                for &s in spins {
                    ops::conjugate_local(&mut rho, &rotation(flip * scale[s - 1], *phase), s, n);
                }
            }
            PulseElement::Delay { duration } => {
                let t = *duration;
                let decay: Vec<f64> = (1..=n).map(|s| (-t / sys.t2(s)).exp()).collect();
                for r in 0..dim {
                    for c in 0..dim {
                        let mut f = C64::from_polar(1.0, -(energies[r] - energies[c]) * t);
                        if t2_on {
                            let diff = r ^ c;
                            for s in 1..=n {
                                if diff >> (n - s) & 1 == 1 {
                                    f *= decay[s - 1];
                                }
                            }
                        }
                        let v = rho.get(r, c);
                        rho.set(r, c, v * f);
                    }
                }
            }
            PulseElement::Gradient => {
                for r in 0..dim {
                    for c in 0..dim {
                        if total_coherence_order(r, c, n) != 0 {
                            rho.set(r, c, C64::new(0.0, 0.0));
                        }
                    }
                }
            }
            _ => unreachable!("macros rejected before evolution"),
        }
    }
    rho
}

/// Ensemble-averaged density matrix after a primitive sequence.
///
/// Ensemble members run in parallel; the average is a pairwise sum in member
/// order, so the result does not depend on thread scheduling.
pub fn simulate_physical(seq: &PulseSequence, rho0: &DensityMatrix, sys: &SpinSystem, noise: &NoiseModel) -> Result<DensityMatrix> {
    noise.validate()?;
    let n = sys.n_spins();
    if rho0.n_qubits() != n {
        return Err(Error::DimensionMismatch(format!("{}-qubit state for {n} spins", rho0.n_qubits())));
    }
    for e in &seq.elements {
        if e.is_macro() {
            return Err(Error::UnexpandedMacro(format!("{e:?}")));
        }
        e.validate(n)?;
    }
    let energies = free_energies(sys, true);
    let scales = noise.scale_factors(n);
    let members: Vec<ComplexMatrix> = scales
        .par_iter()
        .map(|scale| evolve_member(seq, rho0.matrix(), sys, noise.t2_enabled, scale, &energies))
        .collect();
    let mean = pairwise_sum(&members).scale(C64::new(1.0 / members.len() as f64, 0.0));
    Ok(DensityMatrix::from_valid(mean))
}
