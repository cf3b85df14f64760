//! Spin-Hamiltonian toolkit for emulating `-XX` interactions in
//! transverse-field quantum annealing through constraint gadgets.
//!
//! The crate builds weighted Pauli-string Hamiltonians, derives low-energy
//! effective Hamiltonians by Schur-complement partitioning, constructs the
//! three-body / one-hot / chain gadgets and a weighted maximum-independent-set
//! toy problem, and validates them with spectral-gap tracking and
//! time-dependent Schrödinger propagation.

pub mod dynamics;
pub mod effective;
pub mod eigen;
pub mod error;
pub mod gadgets;
pub mod partition;
pub mod pauli;
pub mod schedule;
pub mod sparse;
pub mod spectral;
pub mod state;
pub mod toy;

pub use error::{Error, Result};
pub use pauli::{qubit_mask, Observable, PauliAxis, PauliTerm};
pub use sparse::{apply, assemble, expectation, term_matrix, HermitianOp, SparseOperator};
pub use state::StateVector;
