//! Single-qubit operators and their embeddings into n-qubit registers.

use super::{ComplexMatrix, C64};
use crate::error::{Error, Result};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

pub fn identity2() -> ComplexMatrix {
    ComplexMatrix::identity(2)
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::new(2, 2, vec![ZERO, ONE, ONE, ZERO]).unwrap()
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::new(2, 2, vec![ZERO, -I, I, ZERO]).unwrap()
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::new(2, 2, vec![ONE, ZERO, ZERO, -ONE]).unwrap()
}

pub fn hadamard() -> ComplexMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_real(2, 2, &[h, h, h, -h]).unwrap()
}

/// Pauli matrix by index: 0 = I, 1 = X, 2 = Y, 3 = Z.
pub fn pauli(index: usize) -> ComplexMatrix {
    match index {
        0 => identity2(),
        1 => pauli_x(),
        2 => pauli_y(),
        3 => pauli_z(),
        _ => panic!("pauli index {index} out of range"),
    }
}

/// Spin-½ angular momentum component.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

pub(crate) fn check_qubit(qubit: usize, n: usize) -> Result<()> {
    if qubit == 0 || qubit > n {
        Err(Error::QubitOutOfRange { index: qubit, n })
    } else {
        Ok(())
    }
}

/// Bit shift of a 1-based qubit index in the big-endian ordering.
pub(crate) fn shift(qubit: usize, n: usize) -> usize {
    n - qubit
}

/// `op` acting on `qubit` (1-based) of an `n`-qubit register, identity elsewhere.
pub fn embed(op: &ComplexMatrix, qubit: usize, n: usize) -> Result<ComplexMatrix> {
    check_qubit(qubit, n)?;
    let mut out = ComplexMatrix::identity(1);
    for q in 1..=n {
        out = if q == qubit { out.kron(op) } else { out.kron(&identity2()) };
    }
    Ok(out)
}

/// Product-operator `I_{axis}` of one spin: half the Pauli matrix.
pub fn spin_op(axis: Axis, qubit: usize, n: usize) -> Result<ComplexMatrix> {
    let p = match axis {
        Axis::X => pauli_x(),
        Axis::Y => pauli_y(),
        Axis::Z => pauli_z(),
    };
    embed(&p.scale(C64::new(0.5, 0.0)), qubit, n)
}

/// Tensor product of single-qubit Paulis, `indices[q]` for qubit `q + 1`.
pub fn pauli_string(indices: &[usize]) -> ComplexMatrix {
    indices
        .iter()
        .fold(ComplexMatrix::identity(1), |acc, &k| acc.kron(&pauli(k)))
}

/// `exp(−i·angle·P)` for a Hermitian involution `P` (any Pauli string).
pub fn exp_involution(angle: f64, p: &ComplexMatrix) -> ComplexMatrix {
    let id = ComplexMatrix::identity(p.rows());
    let a = id.scale(C64::new(angle.cos(), 0.0));
    let b = p.scale(C64::new(0.0, -angle.sin()));
    &a + &b
}

/// Single-spin rotation `exp(−i·flip·(I_x cos φ + I_y sin φ))`.
pub fn rotation(flip: f64, phase: f64) -> [[C64; 2]; 2] {
    let (s, c) = (flip / 2.0).sin_cos();
    let minus_i_s = C64::new(0.0, -s);
    [
        [C64::new(c, 0.0), minus_i_s * C64::from_polar(1.0, -phase)],
        [minus_i_s * C64::from_polar(1.0, phase), C64::new(c, 0.0)],
    ]
}

/// `exp(−i·angle·I_z)` on one spin, as the diagonal pair.
pub fn z_phases(angle: f64) -> [C64; 2] {
    [C64::from_polar(1.0, -angle / 2.0), C64::from_polar(1.0, angle / 2.0)]
}

pub fn to_matrix(u: &[[C64; 2]; 2]) -> ComplexMatrix {
    ComplexMatrix::new(2, 2, vec![u[0][0], u[0][1], u[1][0], u[1][1]]).unwrap()
}

/// In-place `ρ ← U ρ U†` for a 2×2 `U` acting on one qubit.
pub fn conjugate_local(rho: &mut ComplexMatrix, u: &[[C64; 2]; 2], qubit: usize, n: usize) {
    let dim = rho.rows();
    let mask = 1usize << shift(qubit, n);
    // rows: ρ ← U ρ
    for r0 in (0..dim).filter(|r| r & mask == 0) {
        let r1 = r0 | mask;
        for c in 0..dim {
            let a = rho.get(r0, c);
            let b = rho.get(r1, c);
            rho.set(r0, c, u[0][0] * a + u[0][1] * b);
            rho.set(r1, c, u[1][0] * a + u[1][1] * b);
        }
    }
    // columns: ρ ← ρ U†
    for c0 in (0..dim).filter(|c| c & mask == 0) {
        let c1 = c0 | mask;
        for r in 0..dim {
            let a = rho.get(r, c0);
            let b = rho.get(r, c1);
            rho.set(r, c0, a * u[0][0].conj() + b * u[0][1].conj());
            rho.set(r, c1, a * u[1][0].conj() + b * u[1][1].conj());
        }
    }
}

/// In-place `U ← U_local · U` for a 2×2 gate on one qubit of an operator.
pub fn left_multiply_local(m: &mut ComplexMatrix, u: &[[C64; 2]; 2], qubit: usize, n: usize) {
    let mask = 1usize << shift(qubit, n);
    for r0 in (0..m.rows()).filter(|r| r & mask == 0) {
        let r1 = r0 | mask;
        for c in 0..m.cols() {
            let a = m.get(r0, c);
            let b = m.get(r1, c);
            m.set(r0, c, u[0][0] * a + u[0][1] * b);
            m.set(r1, c, u[1][0] * a + u[1][1] * b);
        }
    }
}
