//! Constraint gadgets that realise an effective `-XX` interaction from
//! transverse-field driving: the three-body (parity) gadget, the four-qubit
//! one-hot gadget, and the two-qubit ferromagnetic chain used for
//! homogeneous driving. Each gadget comes as a physical Hamiltonian plus its
//! closed-form low-energy effective Hamiltonian.

use crate::error::{Error, Result};
use crate::pauli::{Observable, PauliAxis, PauliAxis::X, PauliAxis::Y, PauliAxis::Z};

/// Penalty coefficients below this multiple of the strongest drive draw a
/// dominance warning (the derivations assume `C_p >> |d_i|`).
const DOMINANCE_FACTOR: f64 = 10.0;

fn check_cp(cp: f64) -> Result<()> {
    if !(cp > 0.0) {
        return Err(Error::InvalidParameter(format!("penalty C_p must be positive, got {cp}")));
    }
    Ok(())
}

fn dominance_warning(cp: f64, drives: &[f64], gadget: &str) -> Option<String> {
    let dmax = drives.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    if cp < DOMINANCE_FACTOR * dmax {
        Some(format!(
            "{gadget}: C_p = {cp} is below {DOMINANCE_FACTOR} * max|d_i| = {:.3}; \
             the low-energy approximation degrades",
            DOMINANCE_FACTOR * dmax
        ))
    } else {
        None
    }
}

/// Parameters of the three-body gadget: penalty `-C_p Z1 Z2 Z12`, drives on
/// all three qubits, and `1/C_p`-scaled logical diagonal terms.
#[derive(Debug, Clone, Copy)]
pub struct ThreeBodySpec {
    pub d1: f64,
    pub d2: f64,
    pub d12: f64,
    pub cp: f64,
    pub h1: f64,
    pub h2: f64,
    pub j12: f64,
}

impl ThreeBodySpec {
    pub fn drives_only(d1: f64, d2: f64, d12: f64, cp: f64) -> Self {
        Self { d1, d2, d12, cp, h1: 0.0, h2: 0.0, j12: 0.0 }
    }

    pub fn dominance_warning(&self) -> Option<String> {
        dominance_warning(self.cp, &[self.d1, self.d2, self.d12], "three-body gadget")
    }
}

/// Parameters of the one-hot gadget: penalty `C_p (sum Z - 2)^2` on four
/// qubits, per-qubit drives, and `1/4C_p`-scaled logical diagonal terms.
#[derive(Debug, Clone, Copy)]
pub struct OneHotSpec {
    pub d: [f64; 4],
    pub cp: f64,
    pub h1: f64,
    pub h2: f64,
    pub j12: f64,
}

impl OneHotSpec {
    pub fn equal_drives(d: f64, cp: f64) -> Self {
        Self { d: [d; 4], cp, h1: 0.0, h2: 0.0, j12: 0.0 }
    }

    pub fn dominance_warning(&self) -> Option<String> {
        dominance_warning(self.cp, &self.d, "one-hot gadget")
    }
}

/// Parameters of the two-qubit ferromagnetic chain (`-2C_p Z1 Z2` penalty).
#[derive(Debug, Clone, Copy)]
pub struct ChainSpec {
    pub d1: f64,
    pub d2: f64,
    pub cp: f64,
}

impl ChainSpec {
    pub fn dominance_warning(&self) -> Option<String> {
        dominance_warning(self.cp, &[self.d1, self.d2], "chain gadget")
    }
}

/// The four logical diagonal operators encodable on the one-hot qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogicalZKind {
    Identity,
    Z1,
    Z2,
    Z1Z2,
}

/// Physical three-body Hamiltonian on qubits (1, 2, 12 -> 3):
/// `-C_p Z1 Z2 Z12 - d1 X1 - d2 X2 - d12 X12 + (h1 Z1 + h2 Z2 + J12 Z12)/C_p`.
pub fn three_body_physical(spec: &ThreeBodySpec) -> Result<Observable> {
    check_cp(spec.cp)?;
    let mut obs = Observable::new(3);
    obs.add(-spec.cp, &[(1, Z), (2, Z), (3, Z)])?;
    obs.add(-spec.d1, &[(1, X)])?;
    obs.add(-spec.d2, &[(2, X)])?;
    obs.add(-spec.d12, &[(3, X)])?;
    if spec.h1 != 0.0 {
        obs.add(spec.h1 / spec.cp, &[(1, Z)])?;
    }
    if spec.h2 != 0.0 {
        obs.add(spec.h2 / spec.cp, &[(2, Z)])?;
    }
    if spec.j12 != 0.0 {
        obs.add(spec.j12 / spec.cp, &[(3, Z)])?;
    }
    Ok(obs)
}

/// Closed-form effective Hamiltonian of the three-body gadget on the two
/// logical qubits:
/// `(-d1 d12 X1 - d2 d12 X2 - d1 d2 X1X2 + h1 Z1 + h2 Z2 + J12 Z1Z2)/C_p`.
pub fn three_body_effective_closed(spec: &ThreeBodySpec) -> Result<Observable> {
    check_cp(spec.cp)?;
    let c = spec.cp;
    let mut obs = Observable::new(2);
    obs.add(-spec.d1 * spec.d12 / c, &[(1, X)])?;
    obs.add(-spec.d2 * spec.d12 / c, &[(2, X)])?;
    obs.add(-spec.d1 * spec.d2 / c, &[(1, X), (2, X)])?;
    obs.add(spec.h1 / c, &[(1, Z)])?;
    obs.add(spec.h2 / c, &[(2, Z)])?;
    obs.add(spec.j12 / c, &[(1, Z), (2, Z)])?;
    Ok(obs)
}

/// The expanded one-hot penalty `C_p (sum_i Z_i - 2)^2` over the given four
/// qubits: `2 C_p sum_{i<j} Z_i Z_j - 4 C_p sum_i Z_i + 8 C_p`, two-body only.
pub fn one_hot_penalty(cp: f64, qubits: [u32; 4]) -> Result<Vec<(f64, Vec<(u32, PauliAxis)>)>> {
    check_cp(cp)?;
    let mut terms = Vec::with_capacity(11);
    for a in 0..4 {
        for b in (a + 1)..4 {
            terms.push((2.0 * cp, vec![(qubits[a], Z), (qubits[b], Z)]));
        }
    }
    for &q in &qubits {
        terms.push((-4.0 * cp, vec![(q, Z)]));
    }
    terms.push((8.0 * cp, Vec::new()));
    Ok(terms)
}

/// Sign patterns of the logical diagonal encodings over physical qubits 1..4,
/// each to be halved: `Z~1 = (Z1+Z2-Z3-Z4)/2` and so on. The `Z~1 Z~2` row
/// follows the encoding table, which is self-consistent with the one-hot
/// state map.
fn logical_z_signs(kind: LogicalZKind) -> [f64; 4] {
    match kind {
        LogicalZKind::Identity => [1.0, 1.0, 1.0, 1.0],
        LogicalZKind::Z1 => [1.0, 1.0, -1.0, -1.0],
        LogicalZKind::Z2 => [1.0, -1.0, 1.0, -1.0],
        LogicalZKind::Z1Z2 => [-1.0, 1.0, 1.0, -1.0],
    }
}

/// The 4-qubit half-sum implementing a logical diagonal operator.
pub fn logical_z_physical(kind: LogicalZKind) -> Observable {
    let signs = logical_z_signs(kind);
    let mut obs = Observable::new(4);
    for (i, &s) in signs.iter().enumerate() {
        obs.add(0.5 * s, &[(i as u32 + 1, Z)]).unwrap();
    }
    obs
}

/// Physical one-hot Hamiltonian on four qubits: expanded penalty, per-qubit
/// drives, and the `1/4C_p`-scaled logical diagonal combinations.
pub fn one_hot_physical(spec: &OneHotSpec) -> Result<Observable> {
    check_cp(spec.cp)?;
    let mut obs = Observable::new(4);
    for (c, f) in one_hot_penalty(spec.cp, [1, 2, 3, 4])? {
        obs.add(c, &f)?;
    }
    for (i, &d) in spec.d.iter().enumerate() {
        obs.add(-d, &[(i as u32 + 1, X)])?;
    }
    let quarter = 1.0 / (4.0 * spec.cp);
    for (h, kind) in [
        (spec.h1, LogicalZKind::Z1),
        (spec.h2, LogicalZKind::Z2),
        (spec.j12, LogicalZKind::Z1Z2),
    ] {
        if h == 0.0 {
            continue;
        }
        let signs = logical_z_signs(kind);
        for (i, &s) in signs.iter().enumerate() {
            obs.add(h * s * quarter, &[(i as u32 + 1, Z)])?;
        }
    }
    Ok(obs)
}

/// Closed-form effective Hamiltonian of the one-hot gadget on the two
/// logical qubits: all six drive-derived terms plus the `1/2C_p`-scaled
/// diagonal terms.
pub fn one_hot_effective_closed(spec: &OneHotSpec) -> Result<Observable> {
    check_cp(spec.cp)?;
    let [d1, d2, d3, d4] = spec.d;
    let q = 1.0 / (4.0 * spec.cp);
    let mut obs = Observable::new(2);
    obs.add(-(d1 * d3 + d2 * d4) * q, &[(1, X)])?;
    obs.add(-(d1 * d2 + d3 * d4) * q, &[(2, X)])?;
    obs.add(-(d2 * d3 + d1 * d4) * q, &[(1, X), (2, X)])?;
    obs.add((d1 * d3 - d2 * d4) * q, &[(1, X), (2, Z)])?;
    obs.add((d1 * d2 - d3 * d4) * q, &[(1, Z), (2, X)])?;
    obs.add((d1 * d4 - d2 * d3) * q, &[(1, Y), (2, Y)])?;
    let half = 1.0 / (2.0 * spec.cp);
    obs.add(spec.h1 * half, &[(1, Z)])?;
    obs.add(spec.h2 * half, &[(2, Z)])?;
    obs.add(spec.j12 * half, &[(1, Z), (2, Z)])?;
    Ok(obs)
}

/// Decodes a 4-qubit basis index to its logical two-bit value, or `None` for
/// states outside the one-hot subspace.
///
/// The encoding: `0001 -> 00`, `0010 -> 01`, `0100 -> 10`, `1000 -> 11`.
pub fn decode_one_hot(basis_index: usize) -> Option<(u8, u8)> {
    match basis_index {
        0b0001 => Some((0, 0)),
        0b0010 => Some((0, 1)),
        0b0100 => Some((1, 0)),
        0b1000 => Some((1, 1)),
        _ => None,
    }
}

/// Physical chain Hamiltonian `-d1 X1 - d2 X2 - 2 C_p Z1 Z2` on two qubits.
pub fn chain_physical(spec: &ChainSpec) -> Result<Observable> {
    check_cp(spec.cp)?;
    let mut obs = Observable::new(2);
    obs.add(-spec.d1, &[(1, X)])?;
    obs.add(-spec.d2, &[(2, X)])?;
    obs.add(-2.0 * spec.cp, &[(1, Z), (2, Z)])?;
    Ok(obs)
}

/// The chain's logical diagonal operator `(Z1 + Z2)/2`.
pub fn chain_logical_z() -> Observable {
    let mut obs = Observable::new(2);
    obs.add(0.5, &[(1, Z)]).unwrap();
    obs.add(0.5, &[(2, Z)]).unwrap();
    obs
}

/// Closed-form effective drive of the chain, `-(d1 d2 / 2C_p) X~` on one
/// logical qubit.
pub fn chain_effective_closed(spec: &ChainSpec) -> Result<Observable> {
    check_cp(spec.cp)?;
    let mut obs = Observable::new(1);
    obs.add(-spec.d1 * spec.d2 / (2.0 * spec.cp), &[(1, X)])?;
    Ok(obs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::assemble;
    use crate::state::StateVector;

    #[test]
    fn three_body_term_inventory() {
        let spec = ThreeBodySpec::drives_only(1.0, 1.0, 1.0, 100.0);
        let obs = three_body_physical(&spec).unwrap();
        assert_eq!(obs.terms().len(), 4);
        let zzz = &obs.terms()[0];
        assert_eq!(zzz.coefficient(), -100.0);
        assert_eq!(zzz.arity(), 3);
        for t in &obs.terms()[1..] {
            assert_eq!(t.coefficient(), -1.0);
            assert_eq!(t.arity(), 1);
        }
    }

    #[test]
    fn three_body_scaled_diagonal() {
        let spec = ThreeBodySpec { d1: 0.0, d2: 0.0, d12: 0.0, cp: 100.0, h1: 0.0, h2: 0.0, j12: 2.0 };
        let obs = three_body_physical(&spec).unwrap();
        let z12 = obs
            .terms()
            .iter()
            .find(|t| t.arity() == 1 && t.factors()[0] == (3, Z))
            .expect("Z12 term present");
        assert!((z12.coefficient() - 0.02).abs() < 1e-15);
    }

    #[test]
    fn three_body_closed_form_coefficients() {
        let spec = ThreeBodySpec::drives_only(1.0, 1.0, 1.0, 100.0);
        let obs = three_body_effective_closed(&spec).unwrap();
        for t in obs.terms().iter().take(3) {
            assert!((t.coefficient() + 0.01).abs() < 1e-15);
        }
        // a zero drive kills two of the three drive terms
        let spec = ThreeBodySpec::drives_only(0.8, 0.0, 0.6, 50.0);
        let obs = three_body_effective_closed(&spec).unwrap();
        let live: Vec<_> = obs
            .terms()
            .iter()
            .filter(|t| t.coefficient() != 0.0 && t.factors().iter().any(|(_, a)| *a == X))
            .collect();
        assert_eq!(live.len(), 1);
        assert!((live[0].coefficient() + 0.8 * 0.6 / 50.0).abs() < 1e-15);
    }

    #[test]
    fn nonpositive_cp_rejected() {
        assert!(three_body_physical(&ThreeBodySpec::drives_only(1.0, 1.0, 1.0, 0.0)).is_err());
        assert!(one_hot_physical(&OneHotSpec::equal_drives(1.0, -5.0)).is_err());
        assert!(chain_physical(&ChainSpec { d1: 1.0, d2: 1.0, cp: 0.0 }).is_err());
    }

    #[test]
    fn dominance_warning_thresholds() {
        assert!(ThreeBodySpec::drives_only(1.0, 1.0, 1.0, 100.0).dominance_warning().is_none());
        assert!(ThreeBodySpec::drives_only(1.0, 1.0, 1.0, 5.0).dominance_warning().is_some());
        assert!(OneHotSpec::equal_drives(1.0, 25.0).dominance_warning().is_none());
    }

    #[test]
    fn one_hot_physical_is_two_body() {
        let spec = OneHotSpec { d: [0.3, -0.7, 1.1, 0.2], cp: 100.0, h1: 0.4, h2: -0.9, j12: 0.5 };
        let obs = one_hot_physical(&spec).unwrap();
        assert!(obs.max_arity() <= 2);
    }

    #[test]
    fn one_hot_penalty_matches_unexpanded_diagonal() {
        // expanded two-body form == (sum Z - 2)^2 evaluated state by state
        let obs =
            one_hot_physical(&OneHotSpec { d: [0.0; 4], cp: 1.0, h1: 0.0, h2: 0.0, j12: 0.0 }).unwrap();
        let d = assemble(&obs).diagonal();
        for idx in 0..16usize {
            let sum_z: f64 = (0..4).map(|b| if idx & (8 >> b) == 0 { 1.0 } else { -1.0 }).sum();
            let expect = (sum_z - 2.0).powi(2);
            assert_eq!(d[idx].re, expect, "state {idx:04b}");
        }
    }

    #[test]
    fn one_hot_equal_drive_terms() {
        let obs = one_hot_physical(&OneHotSpec::equal_drives(1.0, 100.0)).unwrap();
        let xs: Vec<_> = obs
            .terms()
            .iter()
            .filter(|t| t.factors().iter().any(|(_, a)| *a == X))
            .collect();
        assert_eq!(xs.len(), 4);
        for t in xs {
            assert_eq!(t.coefficient(), -1.0);
        }
    }

    #[test]
    fn one_hot_h1_scaling() {
        let spec = OneHotSpec { d: [0.0; 4], cp: 100.0, h1: 1.0, h2: 0.0, j12: 0.0 };
        let obs = one_hot_physical(&spec).unwrap();
        // h1 (Z1 + Z2 - Z3 - Z4) / (4 Cp) -> +-0.0025 per qubit
        let small_z: Vec<f64> = obs
            .terms()
            .iter()
            .filter(|t| t.arity() == 1 && t.factors()[0].1 == Z && t.coefficient().abs() < 1.0)
            .map(|t| t.coefficient())
            .collect();
        assert_eq!(small_z, vec![0.0025, 0.0025, -0.0025, -0.0025]);
    }

    #[test]
    fn one_hot_closed_equal_drives() {
        let obs = one_hot_effective_closed(&OneHotSpec::equal_drives(1.0, 100.0)).unwrap();
        let nonzero: Vec<_> = obs.terms().iter().filter(|t| t.coefficient() != 0.0).collect();
        assert_eq!(nonzero.len(), 3);
        for t in nonzero {
            assert!((t.coefficient() + 0.005).abs() < 1e-15);
            assert!(t.factors().iter().all(|(_, a)| *a == X));
        }
    }

    #[test]
    fn logical_z_truth_table() {
        // one-hot states and their logical Z eigenvalues
        let states = [
            (0b0001usize, (1.0, 1.0)),
            (0b0010, (1.0, -1.0)),
            (0b0100, (-1.0, 1.0)),
            (0b1000, (-1.0, -1.0)),
        ];
        for (idx, (z1, z2)) in states {
            let psi = StateVector::basis_state(16, idx).unwrap();
            let ev = |k: LogicalZKind| assemble(&logical_z_physical(k)).expectation(&psi).unwrap();
            assert_eq!(ev(LogicalZKind::Identity), 1.0, "identity on {idx:04b}");
            assert_eq!(ev(LogicalZKind::Z1), z1, "Z~1 on {idx:04b}");
            assert_eq!(ev(LogicalZKind::Z2), z2, "Z~2 on {idx:04b}");
            assert_eq!(ev(LogicalZKind::Z1Z2), z1 * z2, "Z~1Z~2 on {idx:04b}");
        }
    }

    #[test]
    fn decode_table() {
        assert_eq!(decode_one_hot(0b0100), Some((1, 0)));
        assert_eq!(decode_one_hot(0b1000), Some((1, 1)));
        assert_eq!(decode_one_hot(0b0000), None);
        assert_eq!(decode_one_hot(0b0110), None);
    }

    #[test]
    fn chain_terms() {
        let obs = chain_physical(&ChainSpec { d1: 1.0, d2: 1.0, cp: 100.0 }).unwrap();
        assert_eq!(obs.terms().len(), 3);
        assert_eq!(obs.terms()[2].coefficient(), -200.0);
        assert_eq!(obs.terms()[2].arity(), 2);
    }

    #[test]
    fn chain_logical_z_eigenvalues() {
        let op = assemble(&chain_logical_z());
        let ev = |idx: usize| op.expectation(&StateVector::basis_state(4, idx).unwrap()).unwrap();
        assert_eq!(ev(0b00), 1.0);
        assert_eq!(ev(0b11), -1.0);
        assert_eq!(ev(0b01), 0.0);
    }

    #[test]
    fn chain_zero_drive_kills_effective_coupling() {
        let obs = chain_effective_closed(&ChainSpec { d1: 1.0, d2: 0.0, cp: 100.0 }).unwrap();
        assert_eq!(obs.terms()[0].coefficient(), 0.0);
    }
}
