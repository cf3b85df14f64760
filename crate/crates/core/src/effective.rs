//! Effective low-energy Hamiltonians by Schur complement:
//! `H_eff(E) = H_AA - H_AB (H_BB - E I)^{-1} H_BA` on a subspace partition.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::partition::SubspacePartition;
use crate::sparse::SparseOperator;

/// Largest high-energy block solved densely; bigger blocks use iterative
/// per-column solves.
const DENSE_B_LIMIT: usize = 4096;

/// Dense effective Hamiltonian on the A block of a partition.
#[derive(Debug, Clone)]
pub struct EffectiveResult {
    /// `H_AA - H_AB (H_BB - E I)^{-1} H_BA` in the ordered A basis.
    pub matrix: DMatrix<Complex64>,
    /// The energy substituted for E.
    pub energy_e: f64,
    /// Basis indices of the A subspace, in matrix row order.
    pub basis_labels: Vec<usize>,
}

impl EffectiveResult {
    /// Labeled text dump: one row per line, tagged with its A-basis bitstring.
    pub fn to_text(&self, n_qubits: u32) -> String {
        let mut out = String::new();
        for (i, &label) in self.basis_labels.iter().enumerate() {
            out.push_str(&format!("{:0width$b}:", label, width = n_qubits as usize));
            for j in 0..self.matrix.ncols() {
                let v = self.matrix[(i, j)];
                if v.im == 0.0 {
                    out.push_str(&format!(" {:?}", v.re));
                } else {
                    out.push_str(&format!(" {:?}{:+?}i", v.re, v.im));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Ratios diagnosing the three partitioning assumptions.
#[derive(Debug, Clone, Copy)]
pub struct AssumptionReport {
    /// max off-diagonal magnitude of H_BB over min diagonal magnitude.
    pub diag_dominance: f64,
    /// Spectral norm of H_AB over the diagonal gap between the blocks.
    pub coupling_ratio: f64,
    /// |E - min diag H_AA|.
    pub e_shift: f64,
}

struct Blocks {
    aa: DMatrix<Complex64>,
    ab: DMatrix<Complex64>,
    ba: DMatrix<Complex64>,
    bb: DMatrix<Complex64>,
}

fn extract_blocks(h: &SparseOperator, p: &SubspacePartition) -> Result<Blocks> {
    if h.dim() != p.dim() {
        return Err(Error::DimensionMismatch { op_dim: h.dim(), vec_dim: p.dim() });
    }
    let a = p.indices_a().len();
    let b = p.indices_b().len();
    const NONE: u32 = u32::MAX;
    let mut pos = vec![(NONE, NONE); h.dim()];
    for (i, &idx) in p.indices_a().iter().enumerate() {
        pos[idx].0 = i as u32;
    }
    for (j, &idx) in p.indices_b().iter().enumerate() {
        pos[idx].1 = j as u32;
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut aa = DMatrix::from_element(a, a, zero);
    let mut ab = DMatrix::from_element(a, b, zero);
    let mut ba = DMatrix::from_element(b, a, zero);
    let mut bb = DMatrix::from_element(b, b, zero);
    for (i, &row) in p.indices_a().iter().enumerate() {
        let (cols, vals) = h.row(row);
        for (&c, &v) in cols.iter().zip(vals) {
            let (pa, pb) = pos[c];
            if pa != NONE {
                aa[(i, pa as usize)] += v;
            } else if pb != NONE {
                ab[(i, pb as usize)] += v;
            }
        }
    }
    for (j, &row) in p.indices_b().iter().enumerate() {
        let (cols, vals) = h.row(row);
        for (&c, &v) in cols.iter().zip(vals) {
            let (pa, pb) = pos[c];
            if pa != NONE {
                ba[(j, pa as usize)] += v;
            } else if pb != NONE {
                bb[(j, pb as usize)] += v;
            }
        }
    }
    Ok(Blocks { aa, ab, ba, bb })
}

fn max_row_one_norm(m: &DMatrix<Complex64>) -> f64 {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Smallest-singular-value estimate of a Hermitian matrix via power
/// iteration on its inverse (LU solves).
fn sigma_min_hermitian(lu: &nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>, dim: usize) -> Option<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5157_u64);
    let mut x = nalgebra::DVector::from_fn(dim, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let nx = x.norm();
    if nx == 0.0 {
        return None;
    }
    x /= Complex64::new(nx, 0.0);
    let mut rho = 0.0f64;
    for _ in 0..48 {
        let y = lu.solve(&x)?;
        let ny = y.norm();
        if !ny.is_finite() || ny == 0.0 {
            return None;
        }
        rho = ny;
        x = y / Complex64::new(ny, 0.0);
    }
    Some(1.0 / rho)
}

/// CGLS on the normal equations, used for high-energy blocks too large for a
/// dense factorization. `m` must be Hermitian; the block-diagonal dominance
/// assumed by the partitioning keeps the conditioning benign.
fn cgls_solve(m: &DMatrix<Complex64>, rhs: &nalgebra::DVector<Complex64>, tol: f64) -> Result<nalgebra::DVector<Complex64>> {
    let n = rhs.len();
    let mut x = nalgebra::DVector::from_element(n, Complex64::new(0.0, 0.0));
    let mut r = rhs.clone();
    let mut s = m.ad_mul(&r);
    let mut p = s.clone();
    let mut gamma = s.norm_squared();
    let target = tol * rhs.norm();
    for _ in 0..(8 * n) {
        if r.norm() <= target {
            return Ok(x);
        }
        let q = m * &p;
        let alpha = gamma / q.norm_squared();
        x.axpy(Complex64::new(alpha, 0.0), &p, Complex64::new(1.0, 0.0));
        r.axpy(Complex64::new(-alpha, 0.0), &q, Complex64::new(1.0, 0.0));
        s = m.ad_mul(&r);
        let gamma_new = s.norm_squared();
        let beta = gamma_new / gamma;
        gamma = gamma_new;
        p = &s + p * Complex64::new(beta, 0.0);
    }
    if r.norm() <= target * 10.0 {
        Ok(x)
    } else {
        Err(Error::NoConvergence(format!(
            "iterative block solve stalled at relative residual {:.3e}",
            r.norm() / rhs.norm().max(f64::MIN_POSITIVE)
        )))
    }
}

/// The default energy substitution: the minimum diagonal of H_AA.
pub fn default_e(h: &SparseOperator, p: &SubspacePartition) -> f64 {
    let diag = h.diagonal();
    p.indices_a()
        .iter()
        .map(|&i| diag[i].re)
        .fold(f64::INFINITY, f64::min)
}

/// Exact dense evaluation of the Schur-complement effective Hamiltonian on
/// the given partition; no approximation beyond the partition itself.
///
/// Fails when `(H_BB - E I)` is numerically singular (smallest singular
/// value below `1e-10 * ||H_BB||`), which signals that E lies inside the
/// B-block spectrum.
pub fn schur_effective(h: &SparseOperator, p: &SubspacePartition, e: f64) -> Result<EffectiveResult> {
    let blocks = extract_blocks(h, p)?;
    let a = p.indices_a().len();
    let b = p.indices_b().len();
    if a == 0 {
        return Err(Error::InvalidParameter("empty A subspace".into()));
    }
    if b == 0 {
        return Ok(EffectiveResult {
            matrix: blocks.aa,
            energy_e: e,
            basis_labels: p.indices_a().to_vec(),
        });
    }
    let mut m = blocks.bb.clone();
    for i in 0..b {
        m[(i, i)] -= Complex64::new(e, 0.0);
    }
    let scale = max_row_one_norm(&blocks.bb).max(f64::MIN_POSITIVE);
    let threshold = 1e-10 * scale;

    let exactly_diagonal = (0..b).all(|i| {
        (0..b).all(|j| i == j || (m[(i, j)].re == 0.0 && m[(i, j)].im == 0.0))
    });

    // X = (H_BB - E I)^{-1} H_BA
    let x = if exactly_diagonal {
        let mut sigma_min = f64::INFINITY;
        for i in 0..b {
            sigma_min = sigma_min.min(m[(i, i)].norm());
        }
        if sigma_min <= threshold {
            return Err(Error::SingularBlock { sigma_min, threshold });
        }
        let mut x = blocks.ba.clone();
        for i in 0..b {
            let d = m[(i, i)];
            for j in 0..a {
                x[(i, j)] /= d;
            }
        }
        x
    } else if b <= DENSE_B_LIMIT {
        let lu = m.clone().lu();
        let sigma_min = sigma_min_hermitian(&lu, b)
            .ok_or(Error::SingularBlock { sigma_min: 0.0, threshold })?;
        if sigma_min <= threshold {
            return Err(Error::SingularBlock { sigma_min, threshold });
        }
        lu.solve(&blocks.ba)
            .ok_or(Error::SingularBlock { sigma_min, threshold })?
    } else {
        let mut x = DMatrix::from_element(b, a, Complex64::new(0.0, 0.0));
        for j in 0..a {
            let col = cgls_solve(&m, &nalgebra::DVector::from_column_slice(blocks.ba.column(j).as_slice()), 1e-13)?;
            x.set_column(j, &col);
        }
        x
    };

    let matrix = &blocks.aa - &blocks.ab * x;
    Ok(EffectiveResult { matrix, energy_e: e, basis_labels: p.indices_a().to_vec() })
}

/// Removes the identity component: `m - (tr(m)/dim) I`.
pub fn strip_identity(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let dim = m.nrows();
    assert_eq!(dim, m.ncols(), "strip_identity needs a square matrix");
    let shift = m.trace() / Complex64::new(dim as f64, 0.0);
    let mut out = m.clone();
    for i in 0..dim {
        out[(i, i)] -= shift;
    }
    out
}

/// Spectral norm by power iteration on `M^H M` with a fixed seed.
fn spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x0a1b_u64);
    let mut v = nalgebra::DVector::from_fn(m.ncols(), |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let nv = v.norm();
    if nv == 0.0 {
        return 0.0;
    }
    v /= Complex64::new(nv, 0.0);
    let mut sigma = 0.0f64;
    for _ in 0..80 {
        let w = m * &v;
        let u = m.ad_mul(&w);
        let nu = u.norm();
        if nu == 0.0 {
            return 0.0;
        }
        sigma = nu.sqrt();
        v = u / Complex64::new(nu, 0.0);
    }
    sigma
}

/// Ratios quantifying the three assumptions behind the E-substitution.
pub fn validate_assumptions(h: &SparseOperator, p: &SubspacePartition, e: f64) -> Result<AssumptionReport> {
    let blocks = extract_blocks(h, p)?;
    let a = p.indices_a().len();
    let b = p.indices_b().len();

    let min_diag_a = (0..a).map(|i| blocks.aa[(i, i)].re).fold(f64::INFINITY, f64::min);
    let e_shift = (e - min_diag_a).abs();

    if b == 0 {
        return Ok(AssumptionReport { diag_dominance: 0.0, coupling_ratio: 0.0, e_shift });
    }

    let mut max_off = 0.0f64;
    let mut min_diag_mag = f64::INFINITY;
    let mut min_diag_b = f64::INFINITY;
    for i in 0..b {
        min_diag_mag = min_diag_mag.min(blocks.bb[(i, i)].norm());
        min_diag_b = min_diag_b.min(blocks.bb[(i, i)].re);
        for j in 0..b {
            if i != j {
                max_off = max_off.max(blocks.bb[(i, j)].norm());
            }
        }
    }
    let diag_dominance = if max_off == 0.0 {
        0.0
    } else if min_diag_mag == 0.0 {
        f64::INFINITY
    } else {
        max_off / min_diag_mag
    };

    let max_diag_a = (0..a).map(|i| blocks.aa[(i, i)].re).fold(f64::NEG_INFINITY, f64::max);
    let gap = min_diag_b - max_diag_a;
    let coupling = spectral_norm(&blocks.ab);
    let coupling_ratio = if coupling == 0.0 {
        0.0
    } else if gap <= 0.0 {
        f64::INFINITY
    } else {
        coupling / gap
    };

    Ok(AssumptionReport { diag_dominance, coupling_ratio, e_shift })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{partition_hamming, partition_parity};
    use crate::pauli::Observable;
    use crate::pauli::PauliAxis::{X, Z};
    use crate::sparse::assemble;

    #[test]
    fn scalar_schur_complement() {
        // H = [[0, v], [v, D]], A = {0}, B = {1}, E = 0 -> [-v^2/D]
        let mut obs = Observable::new(1);
        obs.add(0.35, &[(1, X)]).unwrap(); // off-diagonal v
        obs.add(1.0, &[]).unwrap();
        obs.add(-1.0, &[(1, Z)]).unwrap(); // diag(0, 2)
        let h = assemble(&obs);
        let p = partition_hamming(1, 0).unwrap();
        let r = schur_effective(&h, &p, 0.0).unwrap();
        assert_eq!(r.basis_labels, vec![0]);
        let expect = -0.35 * 0.35 / 2.0;
        assert!((r.matrix[(0, 0)].re - expect).abs() < 1e-14);
    }

    #[test]
    fn empty_b_returns_h_aa() {
        let mut obs = Observable::new(2);
        obs.add(0.5, &[(1, Z)]).unwrap();
        obs.add(0.25, &[(1, X)]).unwrap();
        let h = assemble(&obs);
        let p = partition_hamming(2, 1).unwrap().truncate_b(|_| false);
        let r = schur_effective(&h, &p, 0.0).unwrap();
        assert_eq!(r.matrix.nrows(), 2);
        // A = {01, 10}; H_AA diagonal 0.5*Z1 -> +0.5 on 01, -0.5 on 10; X1 couples 01<->11 (in B)
        assert!((r.matrix[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((r.matrix[(1, 1)].re + 0.5).abs() < 1e-15);
        assert_eq!(r.matrix[(0, 1)].norm(), 0.0);
    }

    #[test]
    fn singular_block_detected() {
        // E equal to a B-diagonal makes (H_BB - E I) singular
        let mut obs = Observable::new(1);
        obs.add(1.0, &[]).unwrap();
        obs.add(-1.0, &[(1, Z)]).unwrap(); // diag(0, 2)
        obs.add(0.1, &[(1, X)]).unwrap();
        let h = assemble(&obs);
        let p = partition_hamming(1, 0).unwrap();
        assert!(matches!(schur_effective(&h, &p, 2.0), Err(Error::SingularBlock { .. })));
    }

    #[test]
    fn strip_identity_cases() {
        let id = DMatrix::from_diagonal_element(3, 3, Complex64::new(1.0, 0.0));
        assert_eq!(strip_identity(&id).norm(), 0.0);

        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(3.0, 0.0),
        ]));
        let s = strip_identity(&d);
        assert_eq!(s[(0, 0)].re, -1.0);
        assert_eq!(s[(1, 1)].re, 1.0);
    }

    #[test]
    fn strip_identity_leaves_traceless_untouched() {
        let mut obs = Observable::new(2);
        obs.add(1.0, &[(1, X), (2, Z)]).unwrap();
        let m = assemble(&obs).to_dense();
        let s = strip_identity(&m);
        assert!((&s - &m).norm() < 1e-15);
    }

    #[test]
    fn three_body_assumptions() {
        // -Cp Z1Z2Z3 - d1 X1 - d2 X2 - d12 X3, Cp = 100
        let (d1, d2, d12, cp) = (0.3, 0.5, 0.7, 100.0);
        let mut obs = Observable::new(3);
        obs.add(-cp, &[(1, Z), (2, Z), (3, Z)]).unwrap();
        obs.add(-d1, &[(1, X)]).unwrap();
        obs.add(-d2, &[(2, X)]).unwrap();
        obs.add(-d12, &[(3, X)]).unwrap();
        let h = assemble(&obs);
        let p = partition_parity(3, &[1, 2, 3], true).unwrap();
        let rep = validate_assumptions(&h, &p, -cp).unwrap();
        assert_eq!(rep.diag_dominance, 0.0, "H_BB is exactly diagonal");
        assert!(rep.coupling_ratio <= (d1 + d2 + d12) / (2.0 * cp) + 1e-12);
        assert!(rep.coupling_ratio > 0.0);
        assert_eq!(rep.e_shift, 0.0);
    }

    #[test]
    fn cgls_matches_dense_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 40;
        let mut m = DMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5))
        });
        let mh = m.adjoint();
        m = (&m + mh) * Complex64::new(0.5, 0.0);
        for i in 0..n {
            // indefinite but well-separated diagonal
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            m[(i, i)] += Complex64::new(sign * 8.0, 0.0);
        }
        let rhs = nalgebra::DVector::from_fn(n, |i, _| Complex64::new((i as f64).sin(), 0.3));
        let x = cgls_solve(&m, &rhs, 1e-13).unwrap();
        let direct = m.clone().lu().solve(&rhs).unwrap();
        assert!((x - direct).norm() < 1e-9);
    }
}
