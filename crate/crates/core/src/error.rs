use thiserror::Error;

/// Errors produced by Hamiltonian construction, linear algebra and dynamics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    IndexOutOfRange { index: u32, n_qubits: u32 },

    #[error("qubit index {0} appears twice in a Pauli term")]
    DuplicateIndex(u32),

    #[error("non-finite coefficient in Pauli term")]
    NonFiniteCoefficient,

    #[error("dimension mismatch: operator dim {op_dim}, vector dim {vec_dim}")]
    DimensionMismatch { op_dim: usize, vec_dim: usize },

    #[error("expectation value has imaginary residue {0:.3e}; operator is not Hermitian")]
    NonHermitian(f64),

    #[error("(H_BB - E I) is numerically singular: sigma_min {sigma_min:.3e} <= {threshold:.3e}")]
    SingularBlock { sigma_min: f64, threshold: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("schedule parameter s = {0} outside [0, 1]")]
    ScheduleOutOfRange(f64),

    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),

    #[error("integration failure: {0}")]
    Integration(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
