//! Gate-level model of the randomization protocol and its recovery.
//!
//! The system qubit is qubit 1; the two ancilla qubits are 2 and 3. The
//! randomization unitary is the literal 8×8 matrix from the experiment, which
//! equals `Σ_k op_k ⊗ |k⟩⟨k|` with branch operators `(I, X, iY, Z)` on the
//! ancilla basis `(00, 01, 10, 11)`: the `σ_y` branch carries an extra phase
//! `i`, recorded in [`BRANCH_PHASES`].

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::ops::{hadamard, identity2, pauli_x, pauli_y, pauli_z};
use crate::qstate::{partial_trace, ComplexMatrix, DensityMatrix, StateVector, ALGEBRA_TOL, C64};

/// Phases `χ_k` with branch `k` equal to `e^{iχ_k} σ_k`.
pub const BRANCH_PHASES: [f64; 4] = [0.0, 0.0, FRAC_PI_2, 0.0];

pub const DEFAULT_STRUCTURE_SAMPLES: usize = 64;
pub const DEFAULT_STRUCTURE_SEED: u64 = 0x6e6f_6869_6465;

/// Residual threshold for the structure flags.
const STRUCTURE_TOL: f64 = 1e-10;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `cos(θ/2)|0⟩ + e^{i(φ−π/2)} sin(θ/2)|1⟩`: the `(θ)_φ` pulse applied to `|0⟩`.
pub fn prepare_psi(theta: f64, phi: f64) -> StateVector {
    let (s, co) = (theta / 2.0).sin_cos();
    StateVector::new(vec![c(co, 0.0), C64::from_polar(s, phi - FRAC_PI_2)]).expect("unit norm")
}

/// `(|00⟩ + |01⟩ + |10⟩ + |11⟩)/2`.
pub fn ancilla_state() -> StateVector {
    StateVector::new(vec![c(0.5, 0.0); 4]).expect("unit norm")
}

/// `(|00⟩ + |11⟩)/√2`.
pub fn bell_phi_plus() -> StateVector {
    let h = c(FRAC_1_SQRT_2, 0.0);
    let z = c(0.0, 0.0);
    StateVector::new(vec![h, z, z, h]).expect("unit norm")
}

/// The three-qubit randomization unitary, entries in `{0, ±1}`.
pub fn randomization_unitary() -> ComplexMatrix {
    #[rustfmt::skip]
    let rows: [f64; 64] = [
        1.0, 0.0,  0.0, 0.0, 0.0, 0.0, 0.0,  0.0,
        0.0, 0.0,  0.0, 0.0, 0.0, 1.0, 0.0,  0.0,
        0.0, 0.0,  0.0, 0.0, 0.0, 0.0, 1.0,  0.0,
        0.0, 0.0,  0.0, 1.0, 0.0, 0.0, 0.0,  0.0,
        0.0, 0.0,  0.0, 0.0, 1.0, 0.0, 0.0,  0.0,
        0.0, 1.0,  0.0, 0.0, 0.0, 0.0, 0.0,  0.0,
        0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0,  0.0,
        0.0, 0.0,  0.0, 0.0, 0.0, 0.0, 0.0, -1.0,
    ];
    ComplexMatrix::from_real(8, 8, &rows).expect("8x8")
}

/// Branch operators `(I, X, iY, Z)` paired with ancilla indices `0..4`.
pub fn randomization_branches() -> Vec<(ComplexMatrix, usize)> {
    let paulis = [identity2(), pauli_x(), pauli_y(), pauli_z()];
    paulis
        .into_iter()
        .zip(BRANCH_PHASES)
        .enumerate()
        .map(|(k, (p, chi))| {
            // exact phase factors: e^{iπ/2} = i
            let phase = if chi == 0.0 { c(1.0, 0.0) } else { C64::from_polar(1.0, chi) };
            let phase = c(phase.re.round(), phase.im.round());
            (p.scale(phase), k)
        })
        .collect()
}

/// `Σ_k op_k ⊗ |k⟩⟨k|` with the system first and the ancilla register after it.
pub fn conditional_unitary(branches: &[(ComplexMatrix, usize)]) -> Result<ComplexMatrix> {
    let k = branches.len();
    if k == 0 || !k.is_power_of_two() {
        return Err(Error::IncompleteBranches { expected: k.next_power_of_two().max(2), got: k });
    }
    let sys_dim = branches[0].0.rows();
    let mut seen = vec![false; k];
    for (op, idx) in branches {
        if op.rows() != sys_dim || !op.is_square() {
            return Err(Error::DimensionMismatch("branch operators differ in shape".into()));
        }
        let dev = op.unitarity_deviation();
        if dev >= ALGEBRA_TOL {
            return Err(Error::NotUnitary(dev));
        }
        if *idx >= k {
            return Err(Error::IncompleteBranches { expected: k, got: *idx + 1 });
        }
        if std::mem::replace(&mut seen[*idx], true) {
            return Err(Error::DuplicateBranch(*idx));
        }
    }
    let mut total = ComplexMatrix::zeros(sys_dim * k, sys_dim * k);
    for (op, idx) in branches {
        let mut proj = ComplexMatrix::zeros(k, k);
        proj.set(*idx, *idx, c(1.0, 0.0));
        total = &total + &op.kron(&proj);
    }
    Ok(total)
}

/// Controlled-NOT on an `n`-qubit register (1-based control and target).
pub fn cnot(control: usize, target: usize, n: usize) -> Result<ComplexMatrix> {
    crate::qstate::ops::check_qubit(control, n)?;
    crate::qstate::ops::check_qubit(target, n)?;
    if control == target {
        return Err(Error::InvalidElement("CNOT control equals target".into()));
    }
    let dim = 1usize << n;
    let (cm, tm) = (1usize << (n - control), 1usize << (n - target));
    Ok(ComplexMatrix::from_fn(dim, dim, |r, col| {
        let image = if col & cm != 0 { col ^ tm } else { col };
        if r == image {
            c(1.0, 0.0)
        } else {
            c(0.0, 0.0)
        }
    }))
}

/// Ancilla-local recovery `V₂₃ = CNOT₂₃ · H₂ · CNOT₂₃` on qubits 2, 3.
pub fn recovery_two_qubit() -> ComplexMatrix {
    let cx = cnot(1, 2, 2).expect("valid");
    let h = hadamard().kron(&identity2());
    &(&cx * &h) * &cx
}

/// `I ⊗ V₂₃`.
pub fn recovery_unitary() -> ComplexMatrix {
    identity2().kron(&recovery_two_qubit())
}

/// Every intermediate state of one hide-then-recover run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolRecord {
    pub theta: f64,
    pub phi: f64,
    /// `|ψ⟩ ⊗ |A⟩`.
    pub input_state: StateVector,
    /// `U (|ψ⟩ ⊗ |A⟩)`.
    pub hidden_state: StateVector,
    /// Qubit 1 after hiding.
    pub system_marginal: DensityMatrix,
    pub output_state: StateVector,
    /// Qubit 3 after recovery.
    pub recovered_qubit: DensityMatrix,
    /// Qubits 1, 2 after recovery.
    pub bell_marginal: DensityMatrix,
}

pub fn run_protocol(theta: f64, phi: f64) -> ProtocolRecord {
    let input_state = prepare_psi(theta, phi).tensor(&ancilla_state());
    let hidden_state = input_state.apply(&randomization_unitary()).expect("unitary");
    let system_marginal = partial_trace(&hidden_state.projector(), &[1]).expect("qubit 1");
    let output_state = hidden_state.apply(&recovery_unitary()).expect("unitary");
    let out_rho = output_state.projector();
    let recovered_qubit = partial_trace(&out_rho, &[3]).expect("qubit 3");
    let bell_marginal = partial_trace(&out_rho, &[1, 2]).expect("qubits 1, 2");
    ProtocolRecord {
        theta,
        phi,
        input_state,
        hidden_state,
        system_marginal,
        output_state,
        recovered_qubit,
        bell_marginal,
    }
}

/// `(1/4) Σ_k σ_k ρ σ_k`.
pub fn kraus_randomize(rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.n_qubits() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "randomization acts on one qubit, got {}",
            rho.n_qubits()
        )));
    }
    let mut acc = ComplexMatrix::zeros(2, 2);
    for p in [identity2(), pauli_x(), pauli_y(), pauli_z()] {
        acc = &acc + &rho.matrix().conjugate_by(&p)?;
    }
    DensityMatrix::new(acc.scale(c(0.25, 0.0)))
}

/// Normalized output `|Φ⁺⟩⟨Φ⁺| ⊗ |ψ⟩⟨ψ|`.
///
/// The printed form of this matrix has trace `2(|α|² + |β|²)`; every entry
/// here is half the printed one.
pub fn expected_output(theta: f64, phi: f64) -> DensityMatrix {
    bell_phi_plus().tensor(&prepare_psi(theta, phi)).projector()
}

/// Linear map `V` from a system space into `system ⊗ ancilla`, stored by the
/// images of the system basis states.
#[derive(Clone, Debug, PartialEq)]
pub struct HidingIsometry {
    dim_system: usize,
    dim_ancilla: usize,
    columns: Vec<Vec<C64>>,
}

impl HidingIsometry {
    pub fn new(dim_system: usize, dim_ancilla: usize, columns: Vec<Vec<C64>>) -> Result<Self> {
        let out_dim = dim_system * dim_ancilla;
        if dim_system == 0 || dim_ancilla == 0 || columns.len() != dim_system {
            return Err(Error::DimensionMismatch(format!(
                "need {dim_system} columns, got {}",
                columns.len()
            )));
        }
        if columns.iter().any(|col| col.len() != out_dim) {
            return Err(Error::DimensionMismatch(format!("columns must have length {out_dim}")));
        }
        let mut dev: f64 = 0.0;
        for (i, a) in columns.iter().enumerate() {
            for (j, b) in columns.iter().enumerate() {
                let ip: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((ip - c(target, 0.0)).norm());
            }
        }
        if dev >= ALGEBRA_TOL {
            return Err(Error::NotIsometry(dev));
        }
        Ok(Self { dim_system, dim_ancilla, columns })
    }

    /// `|ψ⟩ ↦ U(|ψ⟩ ⊗ |A⟩)`: the randomization dilation restricted to the fixed ancilla input.
    pub fn randomization() -> Self {
        let u = randomization_unitary();
        let a = ancilla_state();
        let columns = (0..2)
            .map(|i| {
                let input = StateVector::basis(1, i).expect("basis").tensor(&a);
                u.apply(input.amplitudes()).expect("8x8")
            })
            .collect();
        Self::new(2, 4, columns).expect("unitary restriction is an isometry")
    }

    /// `|ψ⟩ ↦ |0⟩ ⊗ |ψ⟩`: the state moves wholesale into the ancilla (erasure of the system).
    pub fn erasure() -> Self {
        let columns = (0..2)
            .map(|i| {
                let mut v = vec![c(0.0, 0.0); 4];
                v[i] = c(1.0, 0.0);
                v
            })
            .collect();
        Self::new(2, 2, columns).expect("isometry")
    }

    /// `|ψ⟩ ↦ |ψ⟩ ⊗ |0⟩`: nothing is hidden.
    pub fn keep_system() -> Self {
        let columns = (0..2)
            .map(|i| {
                let mut v = vec![c(0.0, 0.0); 4];
                v[2 * i] = c(1.0, 0.0);
                v
            })
            .collect();
        Self::new(2, 2, columns).expect("isometry")
    }

    pub fn dim_system(&self) -> usize {
        self.dim_system
    }

    pub fn dim_ancilla(&self) -> usize {
        self.dim_ancilla
    }

    pub fn apply(&self, psi: &[C64]) -> Vec<C64> {
        let mut out = vec![c(0.0, 0.0); self.dim_system * self.dim_ancilla];
        for (amp, col) in psi.iter().zip(&self.columns) {
            for (o, x) in out.iter_mut().zip(col) {
                *o += amp * x;
            }
        }
        out
    }

    /// Reduced system state `Tr_ancilla(V|ψ⟩⟨ψ|V†)`.
    fn system_state(&self, psi: &[C64]) -> ComplexMatrix {
        let big = self.apply(psi);
        let da = self.dim_ancilla;
        ComplexMatrix::from_fn(self.dim_system, self.dim_system, |i, j| {
            (0..da).map(|a| big[i * da + a] * big[j * da + a].conj()).sum()
        })
    }
}

/// Result of [`verify_no_hiding_structure`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    /// `σ` is the same for every sampled input.
    pub sigma_fixed: bool,
    /// `⟨A_j(ψ)|A_k(φ)⟩ = δ_jk ⟨ψ|φ⟩` for every sampled pair.
    pub ancilla_isometry: bool,
    pub sigma_residual: f64,
    pub ancilla_residual: f64,
    pub max_residual: f64,
    /// Number `K` of nonzero eigenvalues of `σ`.
    pub rank: usize,
    pub eigenvalues: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
}

fn random_vector(dim: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    let v: Vec<C64> = (0..dim)
        .map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Checks the two halves of the no-hiding structure on `samples` random inputs.
///
/// (a) the reduced system state `σ` does not depend on the input; (b) with
/// `σ = Σ_k p_k |k⟩⟨k|`, the ancilla components
/// `A_k(ψ) = (⟨k| ⊗ I) V|ψ⟩ / √p_k` satisfy `⟨A_j(ψ)|A_k(φ)⟩ = δ_jk ⟨ψ|φ⟩`, i.e.
/// every `A_k` is an isometric copy of the input and the information sits in
/// the ancilla rather than in system–ancilla correlations.
pub fn verify_no_hiding_structure(v: &HidingIsometry, samples: usize, seed: u64) -> Result<StructureReport> {
    if samples == 0 {
        return Err(Error::InvalidState("need at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ds = v.dim_system;
    let da = v.dim_ancilla;
    let inputs: Vec<(Vec<C64>, Vec<C64>)> = (0..samples)
        .map(|_| (random_vector(ds, &mut rng), random_vector(ds, &mut rng)))
        .collect();

    let sigmas: Vec<ComplexMatrix> = inputs.iter().map(|(psi, _)| v.system_state(psi)).collect();
    let mut mean = ComplexMatrix::zeros(ds, ds);
    for s in &sigmas {
        mean = &mean + s;
    }
    let mean = mean.scale(c(1.0 / samples as f64, 0.0));
    let sigma_residual = sigmas.iter().map(|s| s.max_abs_diff(&mean)).fold(0.0, f64::max);

    let (values, vectors) = mean.eigh();
    let support: Vec<(f64, Vec<C64>)> = values
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > STRUCTURE_TOL)
        .map(|(k, &p)| (p, vectors.column(k)))
        .collect();

    let component = |psi: &[C64], p: f64, ket: &[C64]| -> Vec<C64> {
        let big = v.apply(psi);
        let norm = p.sqrt();
        (0..da)
            .map(|a| (0..ds).map(|i| ket[i].conj() * big[i * da + a]).sum::<C64>() / norm)
            .collect()
    };

    let mut ancilla_residual: f64 = 0.0;
    for (psi, phi) in &inputs {
        let overlap: C64 = psi.iter().zip(phi).map(|(a, b)| a.conj() * b).sum();
        let a_psi: Vec<Vec<C64>> = support.iter().map(|(p, k)| component(psi, *p, k)).collect();
        let a_phi: Vec<Vec<C64>> = support.iter().map(|(p, k)| component(phi, *p, k)).collect();
        for (j, aj) in a_psi.iter().enumerate() {
            for (k, ak) in a_phi.iter().enumerate() {
                let ip: C64 = aj.iter().zip(ak).map(|(x, y)| x.conj() * y).sum();
                let expected = if j == k { overlap } else { c(0.0, 0.0) };
                ancilla_residual = ancilla_residual.max((ip - expected).norm());
            }
        }
    }

    Ok(StructureReport {
        sigma_fixed: sigma_residual < STRUCTURE_TOL,
        ancilla_isometry: ancilla_residual < STRUCTURE_TOL,
        sigma_residual,
        ancilla_residual,
        max_residual: sigma_residual.max(ancilla_residual),
        rank: support.len(),
        eigenvalues: support.iter().map(|(p, _)| *p).collect(),
        samples,
        seed,
    })
}

/// One node of the `(θ, φ)` lattice.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub theta_index: usize,
    pub phi_index: usize,
    pub theta_deg: f64,
    pub phi_deg: f64,
}

impl GridPoint {
    pub fn theta(&self) -> f64 {
        self.theta_deg.to_radians()
    }

    pub fn phi(&self) -> f64 {
        self.phi_deg.to_radians()
    }
}

/// Rectangular lattice `θ ∈ [0°, 180°]`, `φ ∈ [0°, 360°]`, both ends included.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub theta_steps: usize,
    pub phi_steps: usize,
}

impl Default for Grid {
    /// 13 × 25 nodes at 15° spacing.
    fn default() -> Self {
        Self { theta_steps: 13, phi_steps: 25 }
    }
}

impl Grid {
    pub fn new(theta_steps: usize, phi_steps: usize) -> Result<Self> {
        if theta_steps < 2 || phi_steps < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 steps per axis, got {theta_steps}x{phi_steps}"
            )));
        }
        Ok(Self { theta_steps, phi_steps })
    }

    pub fn len(&self) -> usize {
        self.theta_steps * self.phi_steps
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Nodes in θ-major order.
    pub fn points(&self) -> Vec<GridPoint> {
        let t_step = 180.0 / (self.theta_steps - 1) as f64;
        let p_step = 360.0 / (self.phi_steps - 1) as f64;
        (0..self.theta_steps)
            .flat_map(|ti| {
                (0..self.phi_steps).map(move |pi| GridPoint {
                    theta_index: ti,
                    phi_index: pi,
                    theta_deg: ti as f64 * t_step,
                    phi_deg: pi as f64 * p_step,
                })
            })
            .collect()
    }
}

/// [`run_protocol`] over the lattice, ordered by (θ index, φ index).
pub fn grid_scan(theta_steps: usize, phi_steps: usize) -> Result<Vec<ProtocolRecord>> {
    let grid = Grid::new(theta_steps, phi_steps)?;
    Ok(grid
        .points()
        .par_iter()
        .map(|p| run_protocol(p.theta(), p.phi()))
        .collect())
}
