//! Simulation and verification toolkit for the quantum no-hiding experiment.
//!
//! The crate is layered bottom-up:
//!
//! * [`qstate`]: dense complex matrices, state vectors, density matrices and
//!   the usual quantum-information primitives (Kronecker product, partial trace,
//!   fidelity, coherence orders).
//! * [`circuit`]: the randomization dilation, the ancilla recovery circuit and a
//!   structural checker for arbitrary hiding isometries.
//! * [`pulsec`]: lowering of the circuit to NMR pulse sequences, ideal and
//!   physical (offset, J-coupling, T2, RF-error) simulation, and equivalence
//!   checking of compiled sequences against target unitaries.
//! * [`nmrsim`]: transverse signals, receiver phasing, stick spectra and
//!   pseudo-pure states.
//! * [`tomo`]: Pauli-basis tomography and absolute-deviation metrics.
//! * [`experiment`]: grid sweeps and tomography runs that tie the layers together.
//!
//! Basis ordering is big-endian everywhere: qubit 1 is the most significant bit,
//! so the three-qubit basis reads `000, 001, …, 111`. Qubit and spin indices are
//! 1-based at every public boundary.

pub mod circuit;
pub mod error;
pub mod experiment;
pub mod nmrsim;
pub mod pulsec;
pub mod qstate;
pub mod tomo;

pub use error::{Error, Result};
pub use qstate::{ComplexMatrix, DensityMatrix, StateVector, C64};
