//! Pauli-basis state tomography, element-wise deviation metrics and a JSON
//! form for density matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::ops::pauli_string;
use crate::qstate::{ComplexMatrix, DensityMatrix, C64, MAX_QUBITS};

/// `⟨P⟩` for every non-identity Pauli string on `n` qubits.
///
/// String `k` (1 ≤ k < 4ⁿ) is read in base 4 with qubit 1 as the most
/// significant digit and digits `0, 1, 2, 3 = I, X, Y, Z`; `values[k − 1]`
/// holds its expectation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliTable {
    pub n_qubits: usize,
    pub values: Vec<f64>,
}

impl PauliTable {
    pub fn zeros(n_qubits: usize) -> Self {
        Self { n_qubits, values: vec![0.0; (1 << (2 * n_qubits)) - 1] }
    }

    /// Expectation of the string with per-qubit digits `digits` (not all zero).
    pub fn get(&self, digits: &[usize]) -> Option<f64> {
        if digits.len() != self.n_qubits || digits.iter().any(|&d| d > 3) {
            return None;
        }
        let k = digits.iter().fold(0, |acc, &d| acc * 4 + d);
        k.checked_sub(1).and_then(|i| self.values.get(i).copied())
    }
}

fn digits_of(k: usize, n: usize) -> Vec<usize> {
    (0..n).rev().map(|q| (k >> (2 * q)) & 3).collect()
}

/// `Tr(ρ P)` for each non-identity Pauli string.
pub fn pauli_expectations(rho: &DensityMatrix) -> PauliTable {
    let n = rho.n_qubits();
    let values = (1..1usize << (2 * n))
        .map(|k| {
            let p = pauli_string(&digits_of(k, n));
            let m = rho.matrix();
            let mut tr = C64::new(0.0, 0.0);
            for r in 0..m.rows() {
                for c in 0..m.cols() {
                    tr += m.get(r, c) * p.get(c, r);
                }
            }
            tr.re
        })
        .collect();
    PauliTable { n_qubits: n, values }
}

/// `ρ = 2⁻ⁿ (I + Σ ⟨P⟩ P)`.
///
/// The result is Hermitian with unit trace by construction; positivity is not
/// enforced, so noisy tables can yield small negative eigenvalues.
pub fn reconstruct(table: &PauliTable) -> Result<DensityMatrix> {
    let n = table.n_qubits;
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::InvalidState(format!("unsupported qubit count {n}")));
    }
    let expected = (1usize << (2 * n)) - 1;
    if table.values.len() != expected {
        return Err(Error::IncompleteTable { expected, got: table.values.len() });
    }
    let mut acc = ComplexMatrix::identity(1 << n);
    for (k, &v) in table.values.iter().enumerate() {
        if v != 0.0 {
            acc = &acc + &pauli_string(&digits_of(k + 1, n)).scale(C64::new(v, 0.0));
        }
    }
    DensityMatrix::from_hermitian(acc.scale(C64::new(1.0 / (1 << n) as f64, 0.0)))
}

/// Average and maximum element-wise deviation between two `N × N` matrices.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    /// `(1/N²) Σ |x^T_ij − x^E_ij|`.
    pub avg_abs_dev: f64,
    pub max_abs_dev: f64,
    /// `N`, the matrix dimension.
    pub n: usize,
}

/// How complex entries are compared.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviationMetric {
    /// Complex modulus of the difference.
    #[default]
    Modulus,
    /// Real and imaginary parts reported separately.
    RealImag,
}

fn check_same_shape(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.rows() != b.rows() || a.cols() != b.cols() || !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(())
}

fn report_from(diffs: impl Iterator<Item = f64>, n: usize) -> DeviationReport {
    let (mut sum, mut max) = (0.0, 0.0f64);
    for d in diffs {
        sum += d;
        max = max.max(d);
    }
    DeviationReport { avg_abs_dev: sum / (n * n) as f64, max_abs_dev: max, n }
}

pub fn deviation_report(theory: &ComplexMatrix, experiment: &ComplexMatrix) -> Result<DeviationReport> {
    check_same_shape(theory, experiment)?;
    let diffs = theory.as_slice().iter().zip(experiment.as_slice()).map(|(a, b)| (a - b).norm());
    Ok(report_from(diffs, theory.rows()))
}

/// Separate reports for the real and the imaginary parts.
pub fn deviation_report_parts(theory: &ComplexMatrix, experiment: &ComplexMatrix) -> Result<(DeviationReport, DeviationReport)> {
    check_same_shape(theory, experiment)?;
    let pairs = || theory.as_slice().iter().zip(experiment.as_slice());
    Ok((
        report_from(pairs().map(|(a, b)| (a.re - b.re).abs()), theory.rows()),
        report_from(pairs().map(|(a, b)| (a.im - b.im).abs()), theory.rows()),
    ))
}

pub const BASIS_ORDER: &str = "big-endian: qubit 1 is the most significant bit";

/// Serialized density matrix: rows of `[re, im]` pairs plus basis labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrixJson {
    pub n_qubits: usize,
    pub basis_order: String,
    pub basis: Vec<String>,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl From<&DensityMatrix> for DensityMatrixJson {
    fn from(rho: &DensityMatrix) -> Self {
        let n = rho.n_qubits();
        Self {
            n_qubits: n,
            basis_order: BASIS_ORDER.into(),
            basis: (0..rho.dim()).map(|b| format!("{b:0n$b}")).collect(),
            matrix: (0..rho.dim())
                .map(|r| (0..rho.dim()).map(|c| [rho.get(r, c).re, rho.get(r, c).im]).collect())
                .collect(),
        }
    }
}

impl DensityMatrixJson {
    pub fn to_density(&self) -> Result<DensityMatrix> {
        let dim = 1usize << self.n_qubits;
        if self.matrix.len() != dim || self.matrix.iter().any(|row| row.len() != dim) {
            return Err(Error::DimensionMismatch(format!("expected {dim}x{dim} entries")));
        }
        let data = self.matrix.iter().flatten().map(|&[re, im]| C64::new(re, im)).collect();
        DensityMatrix::from_hermitian(ComplexMatrix::new(dim, dim, data)?)
    }
}

pub fn density_to_json(rho: &DensityMatrix) -> String {
    serde_json::to_string_pretty(&DensityMatrixJson::from(rho)).expect("plain data serializes")
}

pub fn density_from_json(text: &str) -> Result<DensityMatrix> {
    let parsed: DensityMatrixJson =
        serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
    parsed.to_density()
}
