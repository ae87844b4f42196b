use thiserror::Error;

pub type Result<T, E = TomoError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum TomoError {
    #[error("matrix is not Hermitian (max |H - H^dagger| = {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("state is not physical (min eigenvalue {min_eigenvalue:e}, trace {trace})")]
    NotPhysical { min_eigenvalue: f64, trace: f64 },

    #[error("noise fidelity {fidelity} is infeasible: white-noise mixing needs F0 in [{min}, 1]")]
    InfeasibleMixing { fidelity: f64, min: f64 },

    #[error("target state is not pure (largest eigenvalue {largest})")]
    NotPure { largest: f64 },

    #[error("discard fix yields a negative pseudo-count: n0 + n1 = {n01} < n- = {n_minus}")]
    NegativePseudoCount { n01: u64, n_minus: u64 },

    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),

    #[error("invalid qubit count {0} (supported: 1..=5)")]
    InvalidQubitCount(usize),

    #[error("invalid Pauli word {0:?}")]
    InvalidPauliWord(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
