use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("qubit {index} out of range for a {n}-qubit register")]
    QubitOutOfRange { index: usize, n: usize },

    #[error("qubit set must not be empty")]
    EmptyQubitSet,

    #[error("operator is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("map is not an isometry (max deviation {0:e})")]
    NotIsometry(f64),

    #[error("duplicate ancilla basis index {0}")]
    DuplicateBranch(usize),

    #[error("branches must cover all {expected} ancilla basis states, got {got}")]
    IncompleteBranches { expected: usize, got: usize },

    #[error("coupling between spins {0} and {1} is zero")]
    ZeroCoupling(usize, usize),

    #[error("sequence still contains macro element `{0}`")]
    UnexpandedMacro(String),

    #[error("invalid spin system: {0}")]
    InvalidSpinSystem(String),

    #[error("invalid pulse element: {0}")]
    InvalidElement(String),

    #[error("invalid noise model: {0}")]
    InvalidNoise(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("no transverse magnetization on spin {0}")]
    ZeroMagnetization(usize),

    #[error("expectation table has {got} entries, expected {expected}")]
    IncompleteTable { expected: usize, got: usize },

    #[error("pseudo-pure polarization {0} outside (0, 1]")]
    InvalidEpsilon(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
