//! Dense complex linear algebra and quantum-state primitives.

mod matrix;
pub mod ops;
mod state;

use serde::{Deserialize, Serialize};

pub use matrix::{kron, ComplexMatrix};
pub use num_complex::Complex64 as C64;
pub use state::{
    fidelity_pure, partial_trace, DensityMatrix, StateVector, HERMITIAN_TOL, MAX_QUBITS, NORM_TOL,
    POSITIVITY_TOL,
};

use crate::error::{Error, Result};

/// Default tolerance for algebraic identities.
pub const ALGEBRA_TOL: f64 = 1e-12;

/// Outcome of a global-phase comparison.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    pub equal: bool,
    /// `φ` with `a ≈ e^{iφ} b`, in `(−π, π]`.
    pub phase: f64,
    /// `‖a − e^{iφ} b‖_max`.
    pub residual: f64,
}

/// Tests `a = e^{iφ} b` with `φ` read off the largest-magnitude entry of `b`.
pub fn equal_up_to_global_phase(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> Result<PhaseReport> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let (k, _) = b
        .as_slice()
        .iter()
        .enumerate()
        .fold((0, -1.0), |best, (k, z)| if z.norm() > best.1 { (k, z.norm()) } else { best });
    let (ak, bk) = (a.as_slice()[k], b.as_slice()[k]);
    let phase = if bk.norm() == 0.0 || ak.norm() == 0.0 { 0.0 } else { (ak / bk).arg() };
    let residual = a.max_abs_diff(&b.scale(C64::from_polar(1.0, phase)));
    Ok(PhaseReport { equal: residual <= tol, phase, residual })
}

/// Coherence class of a density-matrix element by number of flipped spins.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoherenceLabel {
    /// Populations and zero-flip elements.
    Population,
    /// Single-quantum coherence of one spin (1-based).
    SingleQuantum(usize),
    DoubleQuantum,
    TripleQuantum,
    QuadrupleQuantum,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoherenceOrder {
    pub label: CoherenceLabel,
    /// 1-based indices of the spins whose state differs between row and column.
    pub flipped_spins: Vec<usize>,
}

/// Classifies element `(row, col)` of an `n`-spin density matrix.
///
/// # Panics
/// If either index is outside `0..2^n`.
pub fn coherence_order(row: usize, col: usize, n: usize) -> CoherenceOrder {
    assert!(row < 1 << n && col < 1 << n, "basis index out of range for {n} spins");
    let diff = row ^ col;
    let flipped_spins: Vec<usize> = (1..=n).filter(|&q| diff >> (n - q) & 1 == 1).collect();
    let label = match flipped_spins.len() {
        0 => CoherenceLabel::Population,
        1 => CoherenceLabel::SingleQuantum(flipped_spins[0]),
        2 => CoherenceLabel::DoubleQuantum,
        3 => CoherenceLabel::TripleQuantum,
        _ => CoherenceLabel::QuadrupleQuantum,
    };
    CoherenceOrder { label, flipped_spins }
}

/// Total coherence order `M(row) − M(col)` of `|row⟩⟨col|` with `m = +½` for `|0⟩`.
///
/// Unlike [`coherence_order`] this is signed and vanishes for zero-quantum
/// flip-flop terms such as `|01⟩⟨10|`.
pub fn total_coherence_order(row: usize, col: usize, n: usize) -> i32 {
    let m = |idx: usize| -> i32 { (0..n).map(|b| if idx >> b & 1 == 0 { 1 } else { -1 }).sum() };
    (m(row) - m(col)) / 2
}
