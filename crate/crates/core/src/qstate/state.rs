use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Largest register handled anywhere in the crate.
pub const MAX_QUBITS: usize = 4;

pub const NORM_TOL: f64 = 1e-12;
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const POSITIVITY_TOL: f64 = 1e-10;

fn qubits_for_dim(dim: usize) -> Result<usize> {
    if !dim.is_power_of_two() || dim < 2 {
        return Err(Error::InvalidState(format!("dimension {dim} is not 2^n with n ≥ 1")));
    }
    let n = dim.trailing_zeros() as usize;
    if n > MAX_QUBITS {
        return Err(Error::InvalidState(format!("{n} qubits exceeds the {MAX_QUBITS}-qubit cap")));
    }
    Ok(n)
}

/// Normalized pure state of `n` qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let n_qubits = qubits_for_dim(amplitudes.len())?;
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("squared norm {norm} ≠ 1")));
        }
        Ok(Self { n_qubits, amplitudes })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Self::new(amplitudes.into_iter().map(|a| a / norm).collect())
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::InvalidState(format!("basis index {index} ≥ {dim}")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Self::new(amps)
    }

    /// Haar-distributed random state (normalized complex Gaussian vector).
    pub fn random<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Self {
        let amps = (0..1usize << n_qubits)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::normalized(amps).expect("gaussian vector is nonzero")
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amplitudes[index]
    }

    /// `|self⟩ ⊗ |other⟩`, `self` on the leading qubits.
    pub fn tensor(&self, other: &Self) -> Self {
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|&a| other.amplitudes.iter().map(move |&b| a * b))
            .collect();
        Self { n_qubits: self.n_qubits + other.n_qubits, amplitudes }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// `U|self⟩`; fails if `U` has the wrong size or does not preserve the norm.
    pub fn apply(&self, u: &ComplexMatrix) -> Result<Self> {
        Self::new(u.apply(&self.amplitudes)?)
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix {
            n_qubits: self.n_qubits,
            matrix: ComplexMatrix::outer(&self.amplitudes, &self.amplitudes),
        }
    }
}

/// Unit-trace Hermitian operator on `n` qubits.
///
/// [`DensityMatrix::new`] additionally enforces positivity; matrices built by
/// [`DensityMatrix::from_hermitian`] (tomographic reconstructions) may carry
/// small negative eigenvalues, reported by [`DensityMatrix::min_eigenvalue`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let rho = Self::from_hermitian(matrix)?;
        let min = rho.min_eigenvalue();
        if min < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(rho)
    }

    /// Checks shape, unit trace and Hermiticity but not positivity.
    pub fn from_hermitian(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidState("density matrix must be square".into()));
        }
        let n_qubits = qubits_for_dim(matrix.rows())?;
        let tr = matrix.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > NORM_TOL {
            return Err(Error::InvalidState(format!("trace {tr} ≠ 1")));
        }
        let herm = matrix.hermiticity_deviation();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:e})")));
        }
        Ok(Self { n_qubits, matrix })
    }

    /// Skips validation for matrices that are density matrices by construction.
    pub(crate) fn from_valid(matrix: ComplexMatrix) -> Self {
        let n_qubits = matrix.rows().trailing_zeros() as usize;
        debug_assert!(matrix.is_square() && matrix.rows() == 1 << n_qubits);
        Self { n_qubits, matrix }
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        Self::from_valid(ComplexMatrix::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0)))
    }

    /// Random full-rank state `G G† / Tr(G G†)` from a complex Ginibre matrix.
    pub fn random<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Self {
        let dim = 1usize << n_qubits;
        let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let gg = &g * &g.adjoint();
        let tr = gg.trace().re;
        let mut m = gg.scale(C64::new(1.0 / tr, 0.0));
        // exact Hermitian symmetry after rounding
        for i in 0..dim {
            m.set(i, i, C64::new(m.get(i, i).re, 0.0));
            for j in 0..i {
                m.set(i, j, m.get(j, i).conj());
            }
        }
        Self::from_valid(m)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.matrix.get(row, col)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.matrix.eigenvalues_hermitian()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// `U ρ U†`.
    pub fn evolve(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.rows() != self.dim() || !u.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} operator on {}-dimensional state",
                u.rows(),
                u.cols(),
                self.dim()
            )));
        }
        Ok(Self::from_valid(self.matrix.conjugate_by(u)?))
    }

    /// `ρ ⊗ σ`.
    pub fn tensor(&self, other: &Self) -> Self {
        Self::from_valid(self.matrix.kron(&other.matrix))
    }
}

/// Reduced state on the 1-based qubits in `keep`, in ascending qubit order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = rho.n_qubits();
    if keep.is_empty() {
        return Err(Error::EmptyQubitSet);
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    for &q in &kept {
        super::ops::check_qubit(q, n)?;
    }
    let kept_mask: usize = kept.iter().map(|&q| 1usize << (n - q)).sum();
    let compress = |index: usize| -> usize {
        kept.iter().fold(0usize, |acc, &q| (acc << 1) | ((index >> (n - q)) & 1))
    };
    let k = kept.len();
    let mut out = ComplexMatrix::zeros(1 << k, 1 << k);
    let dim = rho.dim();
    for r in 0..dim {
        for c in 0..dim {
            if (r & !kept_mask) != (c & !kept_mask) {
                continue;
            }
            let (rr, cc) = (compress(r), compress(c));
            out[(rr, cc)] += rho.get(r, c);
        }
    }
    Ok(DensityMatrix::from_valid(out))
}

/// `⟨target|ρ|target⟩`, clipped into `[0, 1]`.
pub fn fidelity_pure(target: &StateVector, rho: &DensityMatrix) -> Result<f64> {
    if target.dim() != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state of dimension {} vs density matrix of dimension {}",
            target.dim(),
            rho.dim()
        )));
    }
    let t = target.amplitudes();
    let rt = rho.matrix().apply(t)?;
    let f: f64 = t.iter().zip(&rt).map(|(a, b)| a.conj() * b).sum::<C64>().re;
    Ok(f.clamp(0.0, 1.0))
}
