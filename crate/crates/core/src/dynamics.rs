//! Time-dependent Schrödinger propagation along the anneal, ground-state
//! probability, constraint leakage, and constrained initial-state
//! preparation.
//!
//! Two integrators are available behind one tolerance contract: an adaptive
//! Dormand-Prince 5(4) pair, and an adaptive midpoint-exponential stepper
//! with Krylov `exp(-i h H)` application for the penalty-dominated gadget
//! Hamiltonians (whose spectral radius makes explicit stepping wasteful).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::eigen::{low_spectrum, EigOptions};
use crate::error::{Error, Result};
use crate::partition::SubspacePartition;
use crate::pauli::{qubit_mask, Observable, PauliAxis::X, PauliAxis::Z};
use crate::schedule::{CompiledSchedule, ScheduleKind, ScheduledObservable};
use crate::sparse::{assemble, HermitianOp, SparseOperator};
use crate::state::StateVector;

/// Integrator choice. `Auto` resolves to the Dormand-Prince pair, whose
/// per-component error weighting prices weakly-populated high-frequency
/// components correctly even for penalty-dominated Hamiltonians. The Krylov
/// midpoint stepper is second order in the schedule variation, so it suits
/// loose tolerances on large registers, not tight-tolerance gadget runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Auto,
    AdaptiveRk,
    KrylovMidpoint,
}

/// Parameters of one Schrödinger evolution along a schedule.
#[derive(Debug, Clone, Copy)]
pub struct EvolutionSpec {
    /// Anneal time `t_a` (dimensionless, hbar = 1).
    pub anneal_time: f64,
    /// Physical-time multiplier; 1 for direct variants, `2 C_p` for the
    /// one-hot gadget. `s = t / (time_scaling * t_a)`.
    pub time_scaling: f64,
    /// Accuracy target of the integrator.
    pub tolerance: f64,
    pub method: Method,
}

impl EvolutionSpec {
    pub fn new(anneal_time: f64) -> Self {
        Self { anneal_time, time_scaling: 1.0, tolerance: 1e-9, method: Method::Auto }
    }

    fn validate(&self) -> Result<()> {
        if !(self.anneal_time > 0.0) {
            return Err(Error::InvalidParameter("anneal_time must be positive".into()));
        }
        if !(self.time_scaling > 0.0) {
            return Err(Error::InvalidParameter("time_scaling must be positive".into()));
        }
        if !(self.tolerance > 0.0 && self.tolerance <= 1e-4) {
            return Err(Error::InvalidParameter(format!(
                "integrator tolerance must lie in (0, 1e-4], got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

/// Outcome of one evolution.
#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub final_state: StateVector,
    /// Squared overlap with the (possibly degenerate) ground space of the
    /// final Hamiltonian, restricted to the feasible subspace when one is
    /// given.
    pub p_gs: f64,
    /// `| ||psi|| - 1 |` at the end of the run.
    pub norm_drift: f64,
    /// Population outside the feasible subspace (0 when unconstrained).
    pub leakage: f64,
}

/// Integrates `i dpsi/dt = H(s(t)) psi` over `t in [0, time_scaling * t_a]`
/// and evaluates the final-state diagnostics.
pub fn evolve(
    sched: &ScheduledObservable,
    spec: &EvolutionSpec,
    initial: &StateVector,
    feasible: Option<&SubspacePartition>,
) -> Result<EvolutionResult> {
    spec.validate()?;
    if initial.dim() != sched.dim() {
        return Err(Error::DimensionMismatch { op_dim: sched.dim(), vec_dim: initial.dim() });
    }
    if (initial.norm() - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidParameter("initial state is not normalized".into()));
    }
    let compiled = sched.compile();
    let total_time = spec.time_scaling * spec.anneal_time;
    let mut psi = initial.amplitudes().to_vec();
    match spec.method {
        Method::Auto | Method::AdaptiveRk => rk45(&compiled, total_time, spec.tolerance, &mut psi)?,
        Method::KrylovMidpoint => krylov_midpoint(&compiled, total_time, spec.tolerance, &mut psi)?,
    }
    let final_state = StateVector::from_amplitudes(psi);
    let norm_drift = (final_state.norm() - 1.0).abs();

    let h_final = assemble(&sched.evaluate_at(1.0)?);
    let e0 = ground_reference_energy(&h_final, feasible)?;
    let tol = default_degeneracy_tol(e0);
    let p_gs = ground_probability_inner(&final_state, &h_final, tol, feasible)?;
    let leak = feasible.map_or(0.0, |p| leakage(&final_state, p));
    Ok(EvolutionResult { final_state, p_gs, norm_drift, leakage: leak })
}

/// `1e-8 |E0| + 1e-10`, the default window for ground-space degeneracy.
pub fn default_degeneracy_tol(e0: f64) -> f64 {
    1e-8 * e0.abs() + 1e-10
}

/// Total squared overlap of `psi` with the span of all eigenvectors within
/// `degeneracy_tol` of the lowest eigenvalue.
pub fn ground_state_probability(
    psi: &StateVector,
    final_h: &SparseOperator,
    degeneracy_tol: f64,
) -> Result<f64> {
    ground_probability_inner(psi, final_h, degeneracy_tol, None)
}

fn ground_reference_energy(h: &SparseOperator, feasible: Option<&SubspacePartition>) -> Result<f64> {
    if h.is_diagonal() {
        let diag = h.diagonal();
        let e0 = match feasible {
            Some(p) => p.indices_a().iter().map(|&i| diag[i].re).fold(f64::INFINITY, f64::min),
            None => diag.iter().map(|d| d.re).fold(f64::INFINITY, f64::min),
        };
        Ok(e0)
    } else {
        Ok(low_spectrum(h, 1, &EigOptions::default())?.eigenvalues[0])
    }
}

fn ground_probability_inner(
    psi: &StateVector,
    final_h: &SparseOperator,
    degeneracy_tol: f64,
    feasible: Option<&SubspacePartition>,
) -> Result<f64> {
    if final_h.is_diagonal() {
        let diag = final_h.diagonal();
        let e0 = ground_reference_energy(final_h, feasible)?;
        let in_a: Option<Vec<bool>> = feasible.map(|p| {
            let mut mask = vec![false; final_h.dim()];
            for &i in p.indices_a() {
                mask[i] = true;
            }
            mask
        });
        let mut total = 0.0;
        for (i, d) in diag.iter().enumerate() {
            if d.re <= e0 + degeneracy_tol && in_a.as_ref().is_none_or(|m| m[i]) {
                total += psi.amplitudes()[i].norm_sqr();
            }
        }
        return Ok(total);
    }
    // generic path: expand k until the whole tol-window of the ground space
    // is captured
    let mut k = 4usize.min(final_h.dim());
    loop {
        let opts = EigOptions { want_vectors: true, verify_degeneracy: true, ..EigOptions::default() };
        let spec = low_spectrum(final_h, k, &opts)?;
        let e0 = spec.eigenvalues[0];
        let within = spec.eigenvalues.iter().filter(|&&e| e <= e0 + degeneracy_tol).count();
        if within < k || k == final_h.dim() || k >= 32 {
            let vecs = spec.vectors.as_ref().unwrap();
            let total = vecs
                .iter()
                .take(within)
                .map(|v| v.inner(psi).norm_sqr())
                .sum();
            return Ok(total);
        }
        k = (k * 2).min(final_h.dim());
    }
}

/// Probability weight outside the low-energy subspace: the sum of
/// `|amplitude|^2` over the partition's B indices.
pub fn leakage(psi: &StateVector, p: &SubspacePartition) -> f64 {
    p.indices_b().iter().map(|&i| psi.amplitudes()[i].norm_sqr()).sum()
}

/// Constrained initial-state preparation: starting from the classical state
/// `z`, interpolate `(1-u) H_init + u (-sum X)` with the constraint terms
/// held constant, where `H_init = sum_i (2 z_i - 1) Z_i`.
#[derive(Debug, Clone)]
pub struct PrepSpec {
    /// Target bits, one per qubit, qubit 1 first.
    pub target: Vec<bool>,
    pub prep_time: f64,
    /// Diagonal constraint observable, held constant during the ramp.
    pub constraint: Observable,
    pub tolerance: f64,
}

/// Runs the preparation ramp and returns the final state, which approximates
/// the constrained driver ground state for slow ramps.
pub fn prepare_initial(prep: &PrepSpec) -> Result<StateVector> {
    let n = prep.constraint.n_qubits();
    if prep.target.len() != n as usize {
        return Err(Error::InvalidParameter(format!(
            "target has {} bits for an {}-qubit constraint",
            prep.target.len(),
            n
        )));
    }
    let constraint_op = assemble(&prep.constraint);
    if !constraint_op.is_diagonal() {
        return Err(Error::InvalidParameter(
            "constraint observable must be diagonal in the computational basis".into(),
        ));
    }
    let diag = constraint_op.diagonal();
    let z_index: usize = prep
        .target
        .iter()
        .enumerate()
        .filter(|(_, bit)| **bit)
        .map(|(i, _)| qubit_mask(i as u32 + 1, n))
        .sum();
    let cmin = diag.iter().map(|d| d.re).fold(f64::INFINITY, f64::min);
    let scale = diag.iter().map(|d| d.re.abs()).fold(1.0f64, f64::max);
    if diag[z_index].re > cmin + 1e-9 * scale {
        return Err(Error::InvalidParameter(format!(
            "target state {:0width$b} violates the constraint (penalty {} > minimum {})",
            z_index,
            diag[z_index].re,
            cmin,
            width = n as usize
        )));
    }

    let mut h_init = Observable::new(n);
    for (i, &bit) in prep.target.iter().enumerate() {
        h_init.add(if bit { 1.0 } else { -1.0 }, &[(i as u32 + 1, Z)])?;
    }
    let mut driver = Observable::new(n);
    for q in 1..=n {
        driver.add(-1.0, &[(q, X)])?;
    }
    let mut sched = ScheduledObservable::new(n, 1.0);
    sched.push_group(ScheduleKind::OneMinusS, h_init)?;
    sched.push_group(ScheduleKind::S, driver)?;
    sched.push_group(ScheduleKind::Constant, prep.constraint.clone())?;

    let spec = EvolutionSpec {
        anneal_time: prep.prep_time,
        time_scaling: 1.0,
        tolerance: prep.tolerance,
        method: Method::Auto,
    };
    let initial = StateVector::basis_state(1usize << n, z_index)?;
    let result = evolve(&sched, &spec, &initial, None)?;
    Ok(result.final_state)
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4)
// ---------------------------------------------------------------------------

const DP_C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [&[f64]; 6] = [
    &[1.0 / 5.0],
    &[3.0 / 40.0, 9.0 / 40.0],
    &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
    &[19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
    &[9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0],
    &[35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_ERR: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn rhs(compiled: &CompiledSchedule, s: f64, x: &[Complex64], out: &mut [Complex64]) -> Result<()> {
    let op = compiled.operator_at(s.clamp(0.0, 1.0))?;
    op.apply_into(x, out);
    let minus_i = Complex64::new(0.0, -1.0);
    for v in out.iter_mut() {
        *v *= minus_i;
    }
    Ok(())
}

fn rk45(
    compiled: &CompiledSchedule,
    total_time: f64,
    tol: f64,
    psi: &mut Vec<Complex64>,
) -> Result<()> {
    let dim = psi.len();
    let mut t = 0.0f64;
    let norm0 = compiled.norm_bound_at(0.0).max(1e-12);
    let mut h = (0.1 / norm0).min(total_time);
    let mut k: Vec<Vec<Complex64>> = (0..7).map(|_| vec![Complex64::new(0.0, 0.0); dim]).collect();
    let mut stage = vec![Complex64::new(0.0, 0.0); dim];
    let mut first = true;
    let mut steps = 0usize;

    while t < total_time {
        h = h.min(total_time - t);
        if h < 1e-14 * total_time {
            return Err(Error::Integration(format!("step size underflow at t = {t:.6e}")));
        }
        if first {
            let (head, _) = k.split_at_mut(1);
            rhs(compiled, t / total_time, psi, &mut head[0])?;
            first = false;
        }
        for i in 0..6 {
            stage.copy_from_slice(psi);
            for (j, &a) in DP_A[i].iter().enumerate() {
                if a != 0.0 {
                    let ha = Complex64::new(h * a, 0.0);
                    let kj = &k[j];
                    for (sv, kv) in stage.iter_mut().zip(kj) {
                        *sv += ha * kv;
                    }
                }
            }
            let s = (t + DP_C[i] * h) / total_time;
            let (head, tail) = k.split_at_mut(i + 1);
            let _ = head;
            rhs(compiled, s, &stage, &mut tail[0])?;
        }
        // stage 7 input is the 5th-order solution (FSAL)
        let y_new = stage.clone();
        let mut err_sq = 0.0f64;
        for idx in 0..dim {
            let mut e = Complex64::new(0.0, 0.0);
            for (j, &d) in DP_ERR.iter().enumerate() {
                if d != 0.0 {
                    e += Complex64::new(h * d, 0.0) * k[j][idx];
                }
            }
            let sc = tol + tol * psi[idx].norm();
            let r = e.norm() / sc;
            err_sq += r * r;
        }
        let err = (err_sq / dim as f64).sqrt();

        if err <= 1.0 {
            t += h;
            *psi = y_new;
            k.swap(0, 6); // FSAL: k7 becomes k1 of the next step
            steps += 1;
            if steps % 64 == 0 {
                let n: f64 = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                if (n - 1.0).abs() > 1e-6 {
                    return Err(Error::Integration(format!(
                        "norm drift {:.3e} at t = {t:.6e} exceeds 1e-6",
                        (n - 1.0).abs()
                    )));
                }
            }
        } else {
            first = true;
        }
        let factor = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
        h *= factor.clamp(0.2, 5.0);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Krylov midpoint exponential
// ---------------------------------------------------------------------------

/// Applies `exp(-i tau H) v` by Lanczos projection; returns the a-posteriori
/// error estimate. `v` must be normalized.
fn krylov_expm(
    op: &dyn HermitianOp,
    tau: f64,
    v: &mut Vec<Complex64>,
    ktol: f64,
    max_m: usize,
) -> Result<f64> {
    let dim = v.len();
    let mut basis: Vec<Vec<Complex64>> = vec![v.clone()];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![Complex64::new(0.0, 0.0); dim];
    let mut m = 0usize;

    loop {
        op.apply_into(&basis[m], &mut w);
        let alpha = cdot(&basis[m], &w).re;
        alphas.push(alpha);
        caxpy(Complex64::new(-alpha, 0.0), &basis[m].clone(), &mut w);
        if m > 0 {
            let b = betas[m - 1];
            caxpy(Complex64::new(-b, 0.0), &basis[m - 1].clone(), &mut w);
        }
        // one reorthogonalization pass keeps the small basis clean
        for b in &basis {
            let c = cdot(b, &w);
            caxpy(-c, b, &mut w);
        }
        let beta = cnorm(&w);
        m += 1;

        let happy = beta < 1e-14 * (alphas[0].abs() + 1.0);
        if m >= 3 || happy || m == max_m || m == dim {
            let u = expm_tridiag(&alphas, &betas, tau);
            let err = if happy { 0.0 } else { (beta * tau).abs() * u[m - 1].norm() };
            if err <= ktol || happy || m == max_m || m == dim {
                let mut out = vec![Complex64::new(0.0, 0.0); dim];
                for (j, b) in basis.iter().enumerate() {
                    caxpy(u[j], b, &mut out);
                }
                *v = out;
                return Ok(err);
            }
        }
        betas.push(beta);
        let mut next = w.clone();
        for x in &mut next {
            *x /= beta;
        }
        basis.push(next);
    }
}

/// `exp(-i tau T) e_1` for the real symmetric tridiagonal `T`.
fn expm_tridiag(alphas: &[f64], betas: &[f64], tau: f64) -> Vec<Complex64> {
    let m = alphas.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alphas[i];
        if i + 1 < m {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = t.symmetric_eigen();
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    for k in 0..m {
        let theta = eig.eigenvalues[k];
        let w = eig.eigenvectors[(0, k)];
        let phase = Complex64::new(0.0, -theta * tau).exp() * w;
        for j in 0..m {
            out[j] += phase * eig.eigenvectors[(j, k)];
        }
    }
    out
}

fn krylov_midpoint(
    compiled: &CompiledSchedule,
    total_time: f64,
    tol: f64,
    psi: &mut Vec<Complex64>,
) -> Result<()> {
    let mut t = 0.0f64;
    // initial step from the norm scale; the controller adapts from here
    let norm0 = compiled.norm_bound_at(0.5).max(1e-12);
    let mut h = (1.0 / norm0).max(total_time * 1e-7).min(total_time / 8.0);
    let max_m = 96usize.min(psi.len());
    let mut steps = 0usize;

    while t < total_time {
        h = h.min(total_time - t);
        if h < 1e-14 * total_time {
            return Err(Error::Integration(format!("step size underflow at t = {t:.6e}")));
        }
        let step_tol = tol * (h / total_time).max(1e-16);
        let ktol = step_tol / 10.0;

        // one full step against two half steps (Richardson estimate)
        let mut full = psi.clone();
        let op_mid = compiled.operator_at(((t + h / 2.0) / total_time).clamp(0.0, 1.0))?;
        krylov_expm(&op_mid, h, &mut full, ktol, max_m)?;

        let mut half = psi.clone();
        let op_q1 = compiled.operator_at(((t + h / 4.0) / total_time).clamp(0.0, 1.0))?;
        krylov_expm(&op_q1, h / 2.0, &mut half, ktol / 2.0, max_m)?;
        let op_q3 = compiled.operator_at(((t + 3.0 * h / 4.0) / total_time).clamp(0.0, 1.0))?;
        krylov_expm(&op_q3, h / 2.0, &mut half, ktol / 2.0, max_m)?;

        let mut diff_sq = 0.0f64;
        for (a, b) in full.iter().zip(&half) {
            diff_sq += (a - b).norm_sqr();
        }
        let err = diff_sq.sqrt() / 3.0;

        if err <= step_tol {
            t += h;
            *psi = half;
            steps += 1;
            if steps % 32 == 0 {
                let n: f64 = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                if (n - 1.0).abs() > 1e-6 {
                    return Err(Error::Integration(format!(
                        "norm drift {:.3e} at t = {t:.6e} exceeds 1e-6",
                        (n - 1.0).abs()
                    )));
                }
            }
        }
        let factor = if err > 0.0 { 0.85 * (step_tol / err).powf(1.0 / 3.0) } else { 2.0 };
        h *= factor.clamp(0.3, 2.0);
    }
    Ok(())
}

#[inline]
fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        acc += x.conj() * y;
    }
    acc
}

#[inline]
fn caxpy(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    for (xi, yi) in x.iter().zip(y.iter_mut()) {
        *yi += alpha * xi;
    }
}

#[inline]
fn cnorm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}
