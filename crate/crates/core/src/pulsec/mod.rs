//! NMR pulse-sequence compiler, simulator and equivalence checker.
//!
//! Sequences are stored in time order: element 0 acts first. RF pulses are
//! hard (instantaneous) rotations `exp(−i·flip·(I_x cos φ + I_y sin φ))`.
//! Three macros exist alongside the primitives:
//!
//! * `JBlock(i, j)`: net evolution `exp(−iπ I_iz I_jz)` under the `i–j` coupling
//!   alone, built from `1/(2|J_ij|)` of free precession with π-pulse echoes that
//!   cancel every offset and every other coupling.
//! * `ZRot(spin, α)`: `exp(−iα I_z)` as a three-pulse composite.
//! * `Cnot(c, t)`: the seven-element controlled-NOT built on `JBlock(c, t)`.

mod equiv;
mod sim;
mod text;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::ops::{self, exp_involution, pauli_string};
use crate::qstate::{ComplexMatrix, C64};

pub use equiv::{
    fit_state_z_phases, verify_equivalence, EquivalenceClass, EquivalenceReport, StateFit, EQUIVALENCE_TOL,
};
pub use sim::{sequence_unitary, simulate_physical, Mode, NoiseModel};
pub use text::{parse_sequence, render_sequence};

pub const PHASE_X: f64 = 0.0;
pub const PHASE_Y: f64 = FRAC_PI_2;
pub const PHASE_MINUS_X: f64 = PI;
pub const PHASE_MINUS_Y: f64 = -FRAC_PI_2;

/// Scalar-coupled spin-½ network in the weak-coupling limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinSystem {
    /// Resonance offsets from the carrier, Hz.
    offsets: Vec<f64>,
    /// Symmetric couplings `J_ij`, Hz, zero diagonal.
    j: Vec<Vec<f64>>,
    /// Transverse relaxation times, s.
    t2: Vec<f64>,
}

impl SpinSystem {
    pub fn new(offsets: Vec<f64>, j: Vec<Vec<f64>>, t2: Vec<f64>) -> Result<Self> {
        let n = offsets.len();
        let bad = |msg: String| Err(Error::InvalidSpinSystem(msg));
        if n == 0 || n > crate::qstate::MAX_QUBITS {
            return bad(format!("spin count {n} outside 1..={}", crate::qstate::MAX_QUBITS));
        }
        if t2.len() != n || j.len() != n || j.iter().any(|row| row.len() != n) {
            return bad(format!("expected {n} offsets, {n}x{n} couplings and {n} T2 values"));
        }
        if offsets.iter().chain(t2.iter()).chain(j.iter().flatten()).any(|v| !v.is_finite()) {
            return bad("non-finite parameter".into());
        }
        if let Some(t) = t2.iter().find(|&&t| t <= 0.0) {
            return bad(format!("T2 must be positive, got {t}"));
        }
        for a in 0..n {
            if j[a][a] != 0.0 {
                return bad(format!("J[{0}][{0}] must be zero", a + 1));
            }
            for b in 0..a {
                if j[a][b] != j[b][a] {
                    return bad(format!("J is not symmetric at ({}, {})", a + 1, b + 1));
                }
            }
        }
        Ok(Self { offsets, j, t2 })
    }

    /// CHFBr₂: spins ¹H, ¹⁹F, ¹³C.
    pub fn chfbr2() -> Self {
        let (hf, hc, fc) = (49.7, 224.5, -310.9);
        Self::new(
            vec![350.0, -420.0, 180.0],
            vec![vec![0.0, hf, hc], vec![hf, 0.0, fc], vec![hc, fc, 0.0]],
            vec![1.0, 0.7, 1.0],
        )
        .expect("valid defaults")
    }

    /// The same network with every offset set to zero.
    pub fn on_resonance(&self) -> Self {
        Self { offsets: vec![0.0; self.n_spins()], ..self.clone() }
    }

    pub fn n_spins(&self) -> usize {
        self.offsets.len()
    }

    /// Offset of a 1-based spin, Hz.
    pub fn offset(&self, spin: usize) -> f64 {
        self.offsets[spin - 1]
    }

    /// `J` between two 1-based spins, Hz.
    pub fn coupling(&self, i: usize, k: usize) -> f64 {
        self.j[i - 1][k - 1]
    }

    pub fn t2(&self, spin: usize) -> f64 {
        self.t2[spin - 1]
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn couplings(&self) -> &[Vec<f64>] {
        &self.j
    }

    pub fn t2_values(&self) -> &[f64] {
        &self.t2
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PulseElement {
    /// Simultaneous hard pulse on a set of 1-based spins.
    Rf { spins: Vec<usize>, flip: f64, phase: f64 },
    /// Free precession, seconds.
    Delay { duration: f64 },
    JBlock { i: usize, j: usize },
    ZRot { spin: usize, angle: f64 },
    Cnot { control: usize, target: usize },
    /// z-gradient crusher.
    Gradient,
}

impl PulseElement {
    pub fn rf(spin: usize, flip: f64, phase: f64) -> Self {
        Self::Rf { spins: vec![spin], flip, phase }
    }

    pub fn is_macro(&self) -> bool {
        matches!(self, Self::JBlock { .. } | Self::ZRot { .. } | Self::Cnot { .. })
    }

    /// Structural checks against an `n`-spin system.
    pub fn validate(&self, n: usize) -> Result<()> {
        let pair = |a: usize, b: usize| -> Result<()> {
            ops::check_qubit(a, n)?;
            ops::check_qubit(b, n)?;
            if a == b {
                return Err(Error::InvalidElement(format!("macro spins must differ, got {a} twice")));
            }
            Ok(())
        };
        match self {
            Self::Rf { spins, flip, phase } => {
                if !flip.is_finite() || !phase.is_finite() {
                    return Err(Error::InvalidElement("non-finite RF parameter".into()));
                }
                if spins.is_empty() {
                    return Err(Error::EmptyQubitSet);
                }
                for (k, &s) in spins.iter().enumerate() {
                    ops::check_qubit(s, n)?;
                    if spins[..k].contains(&s) {
                        return Err(Error::InvalidElement(format!("spin {s} listed twice")));
                    }
                }
                Ok(())
            }
            Self::Delay { duration } => {
                if duration.is_finite() && *duration >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidElement(format!("invalid delay {duration}")))
                }
            }
            Self::JBlock { i, j } => pair(*i, *j),
            Self::Cnot { control, target } => pair(*control, *target),
            Self::ZRot { spin, angle } => {
                ops::check_qubit(*spin, n)?;
                if angle.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidElement("non-finite rotation angle".into()))
                }
            }
            Self::Gradient => Ok(()),
        }
    }
}

/// Ordered pulse program, element 0 first in time.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pub elements: Vec<PulseElement>,
}

impl PulseSequence {
    pub fn new(elements: Vec<PulseElement>) -> Self {
        Self { elements }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn push(&mut self, e: PulseElement) {
        self.elements.push(e);
    }

    pub fn extend(&mut self, other: PulseSequence) {
        self.elements.extend(other.elements);
    }

    pub fn is_primitive(&self) -> bool {
        !self.elements.iter().any(PulseElement::is_macro)
    }

    /// Summed delay time, s. Macros are not counted.
    pub fn total_delay(&self) -> f64 {
        self.elements
            .iter()
            .map(|e| match e {
                PulseElement::Delay { duration } => *duration,
                _ => 0.0,
            })
            .sum()
    }

    pub fn rf_count(&self) -> usize {
        self.elements.iter().filter(|e| matches!(e, PulseElement::Rf { .. })).count()
    }
}

/// Single- or multi-spin hard-pulse unitary on an `n`-spin register.
pub fn rf_unitary(spins: &[usize], flip: f64, phase: f64, n: usize) -> Result<ComplexMatrix> {
    let mut u = ComplexMatrix::identity(1 << n);
    let r = ops::rotation(flip, phase);
    for (k, &s) in spins.iter().enumerate() {
        ops::check_qubit(s, n)?;
        if spins[..k].contains(&s) {
            return Err(Error::InvalidElement(format!("spin {s} listed twice")));
        }
        ops::left_multiply_local(&mut u, &r, s, n);
    }
    Ok(u)
}

/// ZRot composite: `[π/2]_{−x}`, `[|α|]_{±y}`, `[π/2]_x` in time order.
fn expand_zrot(spin: usize, angle: f64) -> Vec<PulseElement> {
    let middle = if angle >= 0.0 { PHASE_Y } else { PHASE_MINUS_Y };
    vec![
        PulseElement::rf(spin, FRAC_PI_2, PHASE_MINUS_X),
        PulseElement::rf(spin, angle.abs(), middle),
        PulseElement::rf(spin, FRAC_PI_2, PHASE_X),
    ]
}

/// Controlled-NOT from the `c–t` coupling, `CNOT·e^{−iπ/4}` when the block is exact.
fn expand_cnot(control: usize, target: usize) -> Vec<PulseElement> {
    let h = FRAC_PI_2;
    vec![
        PulseElement::rf(target, h, PHASE_X),
        PulseElement::rf(target, h, PHASE_Y),
        PulseElement::JBlock { i: control, j: target },
        PulseElement::rf(target, h, PHASE_MINUS_Y),
        PulseElement::rf(control, h, PHASE_Y),
        PulseElement::rf(control, h, PHASE_X),
        PulseElement::rf(control, h, PHASE_MINUS_Y),
    ]
}

/// Walsh function `k` on `2^m` segments in natural (Hadamard) order.
fn walsh(k: usize, segment: usize) -> i8 {
    if (k & segment).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Echo train for `JBlock(i, j)` on an `n`-spin system.
///
/// Spins `i` and `j` follow the same sign pattern, so their coupling acts for
/// the whole block while both offsets average to zero. Every other spin gets a
/// distinct nonconstant pattern, which cancels its offset and each of its
/// couplings. For `J_ij < 0` spin `i` starts inverted, flipping the sign of
/// the effective coupling so the block is `exp(−iπ I_iz I_jz)` either way.
fn expand_jblock(i: usize, j: usize, sys: &SpinSystem) -> Result<Vec<PulseElement>> {
    let n = sys.n_spins();
    let jij = sys.coupling(i, j);
    if jij == 0.0 {
        return Err(Error::ZeroCoupling(i, j));
    }
    let tau = 1.0 / (2.0 * jij.abs());
    let others: Vec<usize> = (1..=n).filter(|&s| s != i && s != j).collect();
    // smallest m leaving enough patterns besides 0 and the centre flip
    let mut m = 1;
    while (1usize << m) - 2 < others.len() {
        m += 1;
    }
    let segments = 1usize << m;
    let centre = segments / 2;
    let mut candidates: Vec<usize> = (1..segments).filter(|&k| k != centre).collect();
    candidates.sort_by_key(|&k| ((0..segments - 1).filter(|&s| walsh(k, s) != walsh(k, s + 1)).count(), k));

    let mut pattern = vec![0usize; n + 1];
    pattern[i] = centre;
    pattern[j] = centre;
    for (s, k) in others.iter().zip(&candidates) {
        pattern[*s] = *k;
    }
    let sign = |spin: usize, seg: usize| -> i8 {
        let base = walsh(pattern[spin], seg);
        if jij < 0.0 && spin == i {
            -base
        } else {
            base
        }
    };

    let mut out = Vec::new();
    let mut pulses = vec![0usize; n + 1];
    let mut boundary = |flips: Vec<usize>, out: &mut Vec<PulseElement>| {
        let (mut px, mut mx) = (Vec::new(), Vec::new());
        for s in flips {
            pulses[s] += 1;
            if pulses[s] % 2 == 1 {
                px.push(s);
            } else {
                mx.push(s);
            }
        }
        for (spins, phase) in [(px, PHASE_X), (mx, PHASE_MINUS_X)] {
            if !spins.is_empty() {
                out.push(PulseElement::Rf { spins, flip: PI, phase });
            }
        }
    };
    let segment = tau / segments as f64;
    let mut pending = 0.0;
    let mut current: Vec<i8> = vec![1; n + 1];
    for seg in 0..=segments {
        let next: Vec<i8> = (0..=n).map(|s| if s == 0 || seg == segments { 1 } else { sign(s, seg) }).collect();
        let flips: Vec<usize> = (1..=n).filter(|&s| current[s] != next[s]).collect();
        if !flips.is_empty() {
            if pending > 0.0 {
                out.push(PulseElement::Delay { duration: pending });
                pending = 0.0;
            }
            boundary(flips, &mut out);
        }
        current = next;
        if seg < segments {
            pending += segment;
        }
    }
    if pending > 0.0 {
        out.push(PulseElement::Delay { duration: pending });
    }
    Ok(out)
}

/// Lowers every macro to RF, delay and gradient elements.
pub fn expand_macros(seq: &PulseSequence, sys: &SpinSystem) -> Result<PulseSequence> {
    let n = sys.n_spins();
    let mut out = Vec::with_capacity(seq.len());
    for e in &seq.elements {
        e.validate(n)?;
        match e {
            PulseElement::ZRot { spin, angle } => out.extend(expand_zrot(*spin, *angle)),
            PulseElement::JBlock { i, j } => out.extend(expand_jblock(*i, *j, sys)?),
            PulseElement::Cnot { control, target } => {
                for inner in expand_cnot(*control, *target) {
                    match inner {
                        PulseElement::JBlock { i, j } => out.extend(expand_jblock(i, j, sys)?),
                        other => out.push(other),
                    }
                }
            }
            other => out.push(other.clone()),
        }
    }
    Ok(PulseSequence::new(out))
}

/// Randomization unitary as a macro sequence.
pub fn compile_randomization() -> PulseSequence {
    let h = FRAC_PI_2;
    PulseSequence::new(vec![
        PulseElement::ZRot { spin: 1, angle: -FRAC_PI_2 },
        PulseElement::rf(1, h, PHASE_MINUS_X),
        PulseElement::JBlock { i: 1, j: 3 },
        PulseElement::rf(1, h, PHASE_X),
        PulseElement::JBlock { i: 1, j: 2 },
        PulseElement::rf(1, h, PHASE_MINUS_X),
        PulseElement::ZRot { spin: 3, angle: -FRAC_PI_2 },
    ])
}

/// `CNOT₂₃` in its seven-element form.
pub fn compile_cnot23() -> PulseSequence {
    PulseSequence::new(expand_cnot(2, 3))
}

/// Phase of the `[π/2]` pulse that takes `|0⟩` to `|+⟩` on an ancilla spin.
///
/// `exp(−i(π/2) I_y)|0⟩ = (|0⟩ + |1⟩)/√2`, whereas `−y` would give `|−⟩`.
pub fn pseudo_hadamard_phase() -> f64 {
    PHASE_Y
}

/// Exact Hadamard on one spin: `[π/2]_y` then `[π]_x` (equal to `−iH`).
fn hadamard_pulses(spin: usize) -> Vec<PulseElement> {
    vec![PulseElement::rf(spin, FRAC_PI_2, PHASE_Y), PulseElement::rf(spin, PI, PHASE_X)]
}

/// Whole experiment: crusher, input `(θ)_φ` on spin 1, ancilla preparation,
/// randomization, then `CNOT₂₃ · H₂ · CNOT₂₃`.
pub fn compile_full(theta: f64, phi: f64) -> PulseSequence {
    let mut seq = PulseSequence::new(vec![
        PulseElement::Gradient,
        PulseElement::rf(1, theta, phi),
        PulseElement::Rf { spins: vec![2, 3], flip: FRAC_PI_2, phase: pseudo_hadamard_phase() },
    ]);
    seq.extend(compile_randomization());
    seq.extend(compile_recovery());
    seq
}

/// Ancilla recovery `CNOT₂₃ · H₂ · CNOT₂₃`.
pub fn compile_recovery() -> PulseSequence {
    let mut els = vec![PulseElement::Cnot { control: 2, target: 3 }];
    els.extend(hadamard_pulses(2));
    els.push(PulseElement::Cnot { control: 2, target: 3 });
    PulseSequence::new(els)
}

/// Product of the six closed-form factors
/// `e^{−iπ/4} · e^{iπ/2 I_3z} · e^{−iπ I_1y I_2z} · e^{−iπ I_1z I_3z} · e^{iπ/2 I_1x} · e^{iπ/2 I_1z}`.
pub fn randomization_factor_product() -> ComplexMatrix {
    // exp(−iθ·I_a I_b) = exp(−i(θ/4)·σ_a σ_b); exp(−iθ I_a) = exp(−i(θ/2)·σ_a)
    let factors = [
        ComplexMatrix::identity(8).scale(C64::from_polar(1.0, -FRAC_PI_4)),
        exp_involution(-FRAC_PI_4, &pauli_string(&[0, 0, 3])),
        exp_involution(FRAC_PI_4, &pauli_string(&[2, 3, 0])),
        exp_involution(FRAC_PI_4, &pauli_string(&[3, 0, 3])),
        exp_involution(-FRAC_PI_4, &pauli_string(&[1, 0, 0])),
        exp_involution(-FRAC_PI_4, &pauli_string(&[3, 0, 0])),
    ];
    factors.iter().skip(1).fold(factors[0].clone(), |acc, f| &acc * f)
}

/// Summary of a compiled program for reports and listings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompileReport {
    pub macro_elements: usize,
    pub expanded_elements: usize,
    pub rf_pulses: usize,
    pub total_delay_s: f64,
    /// RF phase used for the ancilla `|0⟩ → |+⟩` pulses, degrees.
    pub pseudo_hadamard_phase_deg: f64,
}

pub fn compile_report(seq: &PulseSequence, sys: &SpinSystem) -> Result<CompileReport> {
    let expanded = expand_macros(seq, sys)?;
    Ok(CompileReport {
        macro_elements: seq.len(),
        expanded_elements: expanded.len(),
        rf_pulses: expanded.rf_count(),
        total_delay_s: expanded.total_delay(),
        pseudo_hadamard_phase_deg: pseudo_hadamard_phase().to_degrees(),
    })
}

#[cfg(test)]
mod tests;
