//! NMR observables: integrated transverse signals, receiver phasing, stick
//! spectra and pseudo-pure states.
//!
//! The signal of spin `k` is `e^{iφ_r} Tr(ρ I_k⁺)` with `I⁺ = I_x + i I_y`,
//! i.e. the sum of the `|1⟩⟨0|`-type elements of `ρ` over the other spins.
//! It integrates the whole multiplet of spin `k`.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::circuit::prepare_psi;
use crate::error::{Error, Result};
use crate::pulsec::SpinSystem;
use crate::qstate::ops::check_qubit;
use crate::qstate::{ComplexMatrix, DensityMatrix, StateVector, C64};

/// Which transverse state defines the positive-absorption phase.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReceiverReference {
    /// The `θ = φ = π/2` input on the observed spin (x magnetization here).
    #[default]
    InputState,
    /// Pure `+y` magnetization.
    YMagnetization,
}

impl ReceiverReference {
    /// Reference state of an `n`-spin register: the transverse state on `spin`,
    /// `|0⟩` on every other spin.
    pub fn state(self, n_spins: usize, spin: usize) -> Result<DensityMatrix> {
        check_qubit(spin, n_spins)?;
        let transverse = match self {
            Self::InputState => prepare_psi(FRAC_PI_2, FRAC_PI_2),
            Self::YMagnetization => prepare_psi(FRAC_PI_2, std::f64::consts::PI),
        };
        let zero = StateVector::basis(1, 0)?;
        let mut psi = if spin == 1 { transverse.clone() } else { zero.clone() };
        for s in 2..=n_spins {
            psi = psi.tensor(if s == spin { &transverse } else { &zero });
        }
        Ok(psi.projector())
    }
}

/// `e^{iφ_r} Tr(ρ (I_x + i I_y))` on one spin.
pub fn transverse_signal(rho: &DensityMatrix, spin: usize, receiver_phase: f64) -> Result<C64> {
    let n = rho.n_qubits();
    check_qubit(spin, n)?;
    let mask = 1usize << (n - spin);
    let sum: C64 = (0..rho.dim()).filter(|r| r & mask == 0).map(|r| rho.get(r | mask, r)).sum();
    Ok(sum * C64::from_polar(1.0, receiver_phase))
}

/// Phase that makes the reference's signal real and positive.
pub fn calibrate_receiver(reference: &DensityMatrix, spin: usize) -> Result<f64> {
    let s = transverse_signal(reference, spin, 0.0)?;
    if s.norm() < 1e-12 {
        return Err(Error::ZeroMagnetization(spin));
    }
    Ok(-s.arg())
}

/// Receiver phase plus the reference magnitude used to normalize signals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Receiver {
    pub phase: f64,
    pub reference_magnitude: f64,
}

impl Receiver {
    pub fn calibrate(reference: &DensityMatrix, spin: usize) -> Result<Self> {
        let phase = calibrate_receiver(reference, spin)?;
        let reference_magnitude = transverse_signal(reference, spin, 0.0)?.norm();
        Ok(Self { phase, reference_magnitude })
    }

    /// Calibration on spin 1 of a three-spin register.
    pub fn standard(kind: ReceiverReference) -> Self {
        Self::calibrate(&kind.state(3, 1).expect("spin 1 exists"), 1).expect("transverse reference")
    }

    /// Phased signal divided by the reference magnitude.
    pub fn normalized(&self, rho: &DensityMatrix, spin: usize) -> Result<C64> {
        Ok(transverse_signal(rho, spin, self.phase)? / self.reference_magnitude)
    }
}

impl Default for Receiver {
    fn default() -> Self {
        Self::standard(ReceiverReference::InputState)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Input,
    Output,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Input => "input",
            Self::Output => "output",
        }
    }
}

/// Reference-normalized integrated signal of one spin at one grid point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationRecord {
    pub theta: f64,
    pub phi: f64,
    pub spin: usize,
    pub signal: C64,
    pub stage: Stage,
}

/// One record per spin, in spin order.
pub fn observe(rho: &DensityMatrix, receiver: &Receiver, stage: Stage, theta: f64, phi: f64) -> Result<Vec<ObservationRecord>> {
    (1..=rho.n_qubits())
        .map(|spin| {
            Ok(ObservationRecord { theta, phi, spin, signal: receiver.normalized(rho, spin)?, stage })
        })
        .collect()
}

/// Single-quantum transition of one spin with the other spins fixed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumLine {
    pub spin: usize,
    /// Basis indices with the observed spin in `|0⟩` and `|1⟩` respectively.
    pub partner_states: (usize, usize),
    pub frequency: f64,
    pub amplitude: C64,
}

/// Stick multiplet of `spin`: `2^{n−1}` lines ordered by the other spins' basis label.
pub fn spectrum_lines(rho: &DensityMatrix, spin: usize, sys: &SpinSystem, receiver_phase: f64) -> Result<Vec<SpectrumLine>> {
    let n = rho.n_qubits();
    check_qubit(spin, n)?;
    if sys.n_spins() != n {
        return Err(Error::DimensionMismatch(format!("{n}-spin state, {}-spin system", sys.n_spins())));
    }
    let mask = 1usize << (n - spin);
    let rot = C64::from_polar(1.0, receiver_phase);
    Ok((0..rho.dim())
        .filter(|r| r & mask == 0)
        .map(|lower| {
            let upper = lower | mask;
            let frequency = sys.offset(spin)
                + (1..=n)
                    .filter(|&s| s != spin)
                    .map(|s| {
                        let m = if lower >> (n - s) & 1 == 0 { 0.5 } else { -0.5 };
                        sys.coupling(spin, s) * m
                    })
                    .sum::<f64>();
            SpectrumLine { spin, partner_states: (lower, upper), frequency, amplitude: rho.get(upper, lower) * rot }
        })
        .collect())
}

/// `(1−ε) I/8 + ε |000⟩⟨000|`.
pub fn pseudo_pure(epsilon: f64) -> Result<DensityMatrix> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    let mut m = ComplexMatrix::identity(8).scale(C64::new((1.0 - epsilon) / 8.0, 0.0));
    m[(0, 0)] += C64::new(epsilon, 0.0);
    DensityMatrix::new(m)
}
