//! Sparse matrices assembled from Pauli observables, plus matrix-free
//! application for register sizes where an explicit matrix is too large.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{Observable, PauliTerm, TermMasks};
use crate::state::StateVector;

/// Anything that can act as a Hermitian linear operator on a state slice.
pub trait HermitianOp: Sync {
    fn dim(&self) -> usize;

    /// `y = A x`. Implementations must be deterministic.
    fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]);
}

/// Compressed-row sparse matrix over `Complex64`.
///
/// Immutable after construction; safe to share across threads.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl SparseOperator {
    /// Matrix of a single Pauli term on an `n_qubits` register.
    ///
    /// The result has exactly one stored entry per row.
    pub fn term_matrix(term: &PauliTerm, n_qubits: u32) -> Result<Self> {
        if term.max_qubit() > n_qubits {
            return Err(Error::IndexOutOfRange { index: term.max_qubit(), n_qubits });
        }
        let dim = 1usize << n_qubits;
        let masks = term.masks(n_qubits);
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut col_idx = Vec::with_capacity(dim);
        let mut values = Vec::with_capacity(dim);
        row_ptr.push(0);
        for r in 0..dim {
            col_idx.push(r ^ masks.flip_mask);
            values.push(masks.value(r));
            row_ptr.push(r + 1);
        }
        Ok(Self { dim, row_ptr, col_idx, values })
    }

    /// Sum of the term matrices of `obs`, with duplicate entries merged.
    pub fn assemble(obs: &Observable) -> Self {
        let n = obs.n_qubits();
        let dim = obs.dim();
        let masks: Vec<TermMasks> = obs.terms().iter().map(|t| t.masks(n)).collect();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        let mut scratch: Vec<(usize, Complex64)> = Vec::with_capacity(masks.len());
        for r in 0..dim {
            scratch.clear();
            for m in &masks {
                scratch.push((r ^ m.flip_mask, m.value(r)));
            }
            scratch.sort_unstable_by_key(|(c, _)| *c);
            let mut i = 0;
            while i < scratch.len() {
                let (c, mut v) = scratch[i];
                let mut j = i + 1;
                while j < scratch.len() && scratch[j].0 == c {
                    v += scratch[j].1;
                    j += 1;
                }
                col_idx.push(c);
                values.push(v);
                i = j;
            }
            row_ptr.push(col_idx.len());
        }
        Self { dim, row_ptr, col_idx, values }
    }

    /// Zero matrix of the given dimension.
    pub fn zero(dim: usize) -> Self {
        Self { dim, row_ptr: vec![0; dim + 1], col_idx: Vec::new(), values: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored entries of one row as parallel (column, value) slices.
    #[inline]
    pub fn row(&self, r: usize) -> (&[usize], &[Complex64]) {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    /// True when every stored off-diagonal entry is exactly zero.
    pub fn is_diagonal(&self) -> bool {
        for r in 0..self.dim {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                if *c != r && (v.re != 0.0 || v.im != 0.0) {
                    return false;
                }
            }
        }
        true
    }

    /// True when every stored entry has an exactly zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    /// The matrix diagonal as a dense vector.
    pub fn diagonal(&self) -> Vec<Complex64> {
        let mut d = vec![Complex64::new(0.0, 0.0); self.dim];
        for r in 0..self.dim {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                if *c == r {
                    d[r] += *v;
                }
            }
        }
        d
    }

    /// Matrix-vector product; does not renormalize.
    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.dim() != self.dim {
            return Err(Error::DimensionMismatch { op_dim: self.dim, vec_dim: psi.dim() });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        self.apply_into(psi.amplitudes(), &mut out);
        Ok(StateVector::from_amplitudes(out))
    }

    /// `<psi|A|psi>` for normalized `psi`; asserts the imaginary residue is
    /// below 1e-10 (anything larger signals a non-Hermitian operator bug).
    pub fn expectation(&self, psi: &StateVector) -> Result<f64> {
        let h_psi = self.apply(psi)?;
        let val = psi.inner(&h_psi);
        if val.im.abs() > 1e-10 {
            return Err(Error::NonHermitian(val.im));
        }
        Ok(val.re)
    }

    /// Dense copy.
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(self.dim, self.dim, Complex64::new(0.0, 0.0));
        for r in 0..self.dim {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                m[(r, *c)] += *v;
            }
        }
        m
    }

    /// Dense real copy, available when the operator is purely real.
    pub fn to_dense_real(&self) -> Option<DMatrix<f64>> {
        if !self.is_real() {
            return None;
        }
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                m[(r, *c)] += v.re;
            }
        }
        Some(m)
    }

    /// Largest entrywise deviation from Hermitian symmetry, `max |M - M^H|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                let mirror = self.entry(*c, r);
                let d = (*v - mirror.conj()).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// Entry lookup by binary search within the row.
    pub fn entry(&self, r: usize, c: usize) -> Complex64 {
        let (cols, vals) = self.row(r);
        let mut acc = Complex64::new(0.0, 0.0);
        for (cc, v) in cols.iter().zip(vals) {
            if *cc == c {
                acc += *v;
            }
        }
        acc
    }

    /// An upper bound on the spectral norm (max row 1-norm).
    pub fn norm_bound(&self) -> f64 {
        (0..self.dim)
            .map(|r| {
                let (_, vals) = self.row(r);
                vals.iter().map(|v| v.norm()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

impl HermitianOp for SparseOperator {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for r in 0..self.dim {
            let lo = self.row_ptr[r];
            let hi = self.row_ptr[r + 1];
            let mut acc = Complex64::new(0.0, 0.0);
            for k in lo..hi {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[r] = acc;
        }
    }
}

/// Matrix-free application of an observable, entry values recomputed per row.
///
/// Used instead of [`SparseOperator`] when the register is too large for an
/// explicit matrix.
pub struct PauliOp {
    dim: usize,
    masks: Vec<TermMasks>,
}

impl PauliOp {
    pub fn new(obs: &Observable) -> Self {
        let n = obs.n_qubits();
        Self { dim: obs.dim(), masks: obs.terms().iter().map(|t| t.masks(n)).collect() }
    }
}

impl HermitianOp for PauliOp {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        y.fill(Complex64::new(0.0, 0.0));
        for m in &self.masks {
            if m.flip_mask == 0 {
                for (r, yr) in y.iter_mut().enumerate() {
                    *yr += m.value(r) * x[r];
                }
            } else {
                for (r, yr) in y.iter_mut().enumerate() {
                    *yr += m.value(r) * x[r ^ m.flip_mask];
                }
            }
        }
    }
}

/// Weighted sum of borrowed operators, `A = sum w_i A_i`, applied termwise.
///
/// Lets schedule evaluation reuse per-group matrices instead of reassembling.
pub struct WeightedSumOp<'a> {
    dim: usize,
    parts: Vec<(f64, &'a SparseOperator)>,
}

impl<'a> WeightedSumOp<'a> {
    pub fn new(parts: Vec<(f64, &'a SparseOperator)>) -> Self {
        let dim = parts.first().map_or(0, |(_, op)| op.dim());
        debug_assert!(parts.iter().all(|(_, op)| op.dim() == dim));
        Self { dim, parts }
    }
}

impl HermitianOp for WeightedSumOp<'_> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        y.fill(Complex64::new(0.0, 0.0));
        for (w, op) in &self.parts {
            if *w == 0.0 {
                continue;
            }
            for r in 0..self.dim {
                let lo = op.row_ptr[r];
                let hi = op.row_ptr[r + 1];
                let mut acc = Complex64::new(0.0, 0.0);
                for k in lo..hi {
                    acc += op.values[k] * x[op.col_idx[k]];
                }
                y[r] += *w * acc;
            }
        }
    }
}

/// Convenience wrappers matching the operation names used elsewhere.
pub fn assemble(obs: &Observable) -> SparseOperator {
    SparseOperator::assemble(obs)
}

pub fn term_matrix(term: &PauliTerm, n_qubits: u32) -> Result<SparseOperator> {
    SparseOperator::term_matrix(term, n_qubits)
}

pub fn apply(op: &SparseOperator, psi: &StateVector) -> Result<StateVector> {
    op.apply(psi)
}

pub fn expectation(op: &SparseOperator, psi: &StateVector) -> Result<f64> {
    op.expectation(psi)
}
