//! Splitting the computational basis into low-energy (A) and high-energy (B)
//! index sets.

use crate::error::{Error, Result};
use crate::pauli::qubit_mask;

/// An ordered split of basis indices into a low-energy set A and a
/// high-energy set B.
///
/// Unless the partition is marked truncated, A and B together cover all
/// `2^n` indices. A truncated partition restricts B to a subset, mirroring
/// derivations that keep only part of the high-energy block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubspacePartition {
    n_qubits: u32,
    indices_a: Vec<usize>,
    indices_b: Vec<usize>,
    truncated: bool,
}

impl SubspacePartition {
    /// Builds a partition from a predicate selecting the A set; indices are
    /// ordered ascending on both sides.
    pub fn from_predicate<F: Fn(usize) -> bool>(n_qubits: u32, in_a: F) -> Self {
        let dim = 1usize << n_qubits;
        let mut indices_a = Vec::new();
        let mut indices_b = Vec::new();
        for idx in 0..dim {
            if in_a(idx) {
                indices_a.push(idx);
            } else {
                indices_b.push(idx);
            }
        }
        Self { n_qubits, indices_a, indices_b, truncated: false }
    }

    pub fn n_qubits(&self) -> u32 {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }

    pub fn indices_a(&self) -> &[usize] {
        &self.indices_a
    }

    pub fn indices_b(&self) -> &[usize] {
        &self.indices_b
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    /// Restricts B to the indices selected by `keep`; the result is marked
    /// truncated. Keeping everything returns the partition unchanged (and
    /// unmarked).
    pub fn truncate_b<F: Fn(usize) -> bool>(&self, keep: F) -> Self {
        let kept: Vec<usize> = self.indices_b.iter().copied().filter(|&i| keep(i)).collect();
        if kept.len() == self.indices_b.len() {
            return self.clone();
        }
        Self {
            n_qubits: self.n_qubits,
            indices_a: self.indices_a.clone(),
            indices_b: kept,
            truncated: true,
        }
    }
}

/// A = all basis states of the given Hamming weight, B = the rest.
pub fn partition_hamming(n_qubits: u32, weight: u32) -> Result<SubspacePartition> {
    if weight > n_qubits {
        return Err(Error::InvalidParameter(format!(
            "Hamming weight {weight} exceeds register size {n_qubits}"
        )));
    }
    Ok(SubspacePartition::from_predicate(n_qubits, |idx| {
        idx.count_ones() == weight
    }))
}

/// A = basis states whose bit parity, restricted to `qubits`, is even (or
/// odd when `even` is false).
pub fn partition_parity(n_qubits: u32, qubits: &[u32], even: bool) -> Result<SubspacePartition> {
    let mut mask = 0usize;
    for &q in qubits {
        if q == 0 || q > n_qubits {
            return Err(Error::IndexOutOfRange { index: q, n_qubits });
        }
        mask |= qubit_mask(q, n_qubits);
    }
    Ok(SubspacePartition::from_predicate(n_qubits, |idx| {
        ((idx & mask).count_ones() % 2 == 0) == even
    }))
}
