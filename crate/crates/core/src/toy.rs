//! The weighted maximum-independent-set toy problem on a complete bipartite
//! graph, in four driver variants: plain transverse field, transverse field
//! with a direct `-XX` interaction, the one-hot gadget, and the one-hot
//! gadget with homogeneous driving.
//!
//! `G_0` holds qubits `1..n0` with node weight `(1+dW)/n0`; `G_1` holds
//! qubits `n0+1..2n0+1` with node weight `1/(n0+1)`. The `-XX` pair (and the
//! gadget replacing it) always sits on the first two `G_0` qubits.

use crate::error::{Error, Result};
use crate::gadgets::one_hot_penalty;
use crate::partition::SubspacePartition;
use crate::pauli::{Observable, PauliAxis::X, PauliAxis::Z};
use crate::schedule::{ScheduleKind, ScheduledObservable};

/// Driver variant of the toy experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Tf,
    Xx,
    OneHot,
    OneHotHom,
}

impl Variant {
    pub fn label(self) -> &'static str {
        match self {
            Variant::Tf => "tf",
            Variant::Xx => "xx",
            Variant::OneHot => "onehot",
            Variant::OneHotHom => "onehot-hom",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tf" => Ok(Variant::Tf),
            "xx" => Ok(Variant::Xx),
            "onehot" | "oh" | "one-hot" => Ok(Variant::OneHot),
            "onehot-hom" | "ohhom" | "one-hot-hom" => Ok(Variant::OneHotHom),
            other => Err(Error::Parse(format!("unknown variant '{other}'"))),
        }
    }
}

/// Parameters of one experiment configuration.
#[derive(Debug, Clone, Copy)]
pub struct ToyInstance {
    pub n0: u32,
    pub jzz: f64,
    pub delta_w: f64,
    pub cp: f64,
    pub variant: Variant,
}

impl ToyInstance {
    /// Paper defaults: `J_zz = 5.33`, `dW = 0.1`, `C_p = 100`.
    pub fn new(n0: u32, variant: Variant) -> Self {
        Self { n0, jzz: 5.33, delta_w: 0.1, cp: 100.0, variant }
    }

    /// Number of logical problem qubits, `2 n0 + 1`.
    pub fn n_logical(&self) -> u32 {
        2 * self.n0 + 1
    }

    fn validate(&self) -> Result<()> {
        if self.n0 < 2 {
            return Err(Error::InvalidParameter(format!(
                "n0 must be at least 2 (the -XX pair lives in G_0), got {}",
                self.n0
            )));
        }
        if self.cp <= 0.0 {
            return Err(Error::InvalidParameter("C_p must be positive".into()));
        }
        Ok(())
    }

    /// Local-field coefficients `(w0, w1)` of the `G_0` and `G_1` qubits.
    pub fn field_weights(&self) -> (f64, f64) {
        let n0 = self.n0 as f64;
        let n1 = n0 + 1.0;
        let w0 = n1 * self.jzz - 2.0 * (1.0 + self.delta_w) / n0;
        let w1 = n0 * self.jzz - 2.0 / n1;
        (w0, w1)
    }
}

/// Role of one physical qubit in a variant's register.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QubitRole {
    /// One-hot gadget qubit `1h..4h`.
    Gadget(u8),
    /// Plain problem qubit carrying the given logical index.
    Problem { logical: u32 },
    /// Member `leg` (1 or 2) of the ferromagnetic chain encoding a logical qubit.
    ChainLeg { logical: u32, leg: u8 },
}

/// Physical register layout of a built anneal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QubitLayout {
    roles: Vec<QubitRole>,
}

impl QubitLayout {
    pub fn n_qubits(&self) -> u32 {
        self.roles.len() as u32
    }

    pub fn roles(&self) -> &[QubitRole] {
        &self.roles
    }

    /// Partition of the register into the constraint-satisfying subspace (A)
    /// and the penalized remainder; `None` for unconstrained variants.
    pub fn constraint_partition(&self) -> Option<SubspacePartition> {
        let n = self.n_qubits();
        let has_gadget = self.roles.iter().any(|r| matches!(r, QubitRole::Gadget(_)));
        if !has_gadget {
            return None;
        }
        let gadget_mask: usize = self
            .roles
            .iter()
            .enumerate()
            .filter(|(_, r)| matches!(r, QubitRole::Gadget(_)))
            .map(|(i, _)| crate::pauli::qubit_mask(i as u32 + 1, n))
            .sum();
        let mut chain_masks: Vec<usize> = Vec::new();
        let mut i = 0;
        while i < self.roles.len() {
            if let QubitRole::ChainLeg { logical, leg: 1 } = self.roles[i] {
                let m1 = crate::pauli::qubit_mask(i as u32 + 1, n);
                let m2 = crate::pauli::qubit_mask(i as u32 + 2, n);
                debug_assert_eq!(self.roles[i + 1], QubitRole::ChainLeg { logical, leg: 2 });
                chain_masks.push(m1 | m2);
                i += 2;
            } else {
                i += 1;
            }
        }
        Some(SubspacePartition::from_predicate(n, move |idx| {
            (idx & gadget_mask).count_ones() == 1
                && chain_masks.iter().all(|m| (idx & m).count_ones() % 2 == 0)
        }))
    }
}

/// The Ising problem Hamiltonian of the TF / XX variants on `2 n0 + 1`
/// logical qubits: local fields on both sets and `J_zz Z_i Z_j` on every
/// `G_0 x G_1` pair.
pub fn build_problem(inst: &ToyInstance) -> Result<Observable> {
    inst.validate()?;
    if !matches!(inst.variant, Variant::Tf | Variant::Xx) {
        return Err(Error::InvalidParameter(
            "build_problem applies to the TF and XX variants; gadget variants re-encode the problem".into(),
        ));
    }
    let n = inst.n_logical();
    let (w0, w1) = inst.field_weights();
    let mut obs = Observable::new(n);
    for i in 1..=inst.n0 {
        obs.add(w0, &[(i, Z)])?;
    }
    for j in (inst.n0 + 1)..=n {
        obs.add(w1, &[(j, Z)])?;
    }
    for i in 1..=inst.n0 {
        for j in (inst.n0 + 1)..=n {
            obs.add(inst.jzz, &[(i, Z), (j, Z)])?;
        }
    }
    Ok(obs)
}

/// Builds the schedule-tagged annealing Hamiltonian and the register layout
/// for the instance's variant.
pub fn build_anneal(inst: &ToyInstance) -> Result<(ScheduledObservable, QubitLayout)> {
    inst.validate()?;
    match inst.variant {
        Variant::Tf | Variant::Xx => build_plain(inst),
        Variant::OneHot => build_one_hot(inst),
        Variant::OneHotHom => build_one_hot_hom(inst),
    }
}

fn build_plain(inst: &ToyInstance) -> Result<(ScheduledObservable, QubitLayout)> {
    let n = inst.n_logical();
    let mut driver = Observable::new(n);
    for q in 1..=n {
        driver.add(-1.0, &[(q, X)])?;
    }
    if inst.variant == Variant::Xx {
        driver.add(-1.0, &[(1, X), (2, X)])?;
    }
    let problem = build_problem(inst)?;
    let mut sched = ScheduledObservable::new(n, inst.cp);
    sched.push_group(ScheduleKind::OneMinusS, driver)?;
    sched.push_group(ScheduleKind::S, problem)?;
    let layout = QubitLayout {
        roles: (1..=n).map(|q| QubitRole::Problem { logical: q }).collect(),
    };
    Ok((sched, layout))
}

/// One-hot variant: gadget qubits 1..4 encode logical qubits 1 and 2;
/// logical qubit `q >= 3` sits on physical qubit `q + 2`.
fn build_one_hot(inst: &ToyInstance) -> Result<(ScheduledObservable, QubitLayout)> {
    let n0 = inst.n0;
    let n_log = inst.n_logical();
    let n = 2 * n0 + 3;
    let phys = |q: u32| q + 2;
    let (w0, w1) = inst.field_weights();

    let mut penalty = Observable::new(n);
    for (c, f) in one_hot_penalty(inst.cp, [1, 2, 3, 4])? {
        penalty.add(c, &f)?;
    }

    let mut plain_drive = Observable::new(n);
    for q in 3..=n_log {
        plain_drive.add(-1.0, &[(phys(q), X)])?;
    }

    let mut gadget_drive = Observable::new(n);
    for g in 1..=4 {
        gadget_drive.add(-1.0, &[(g, X)])?;
    }

    // H_p^OH: the problem with qubit-1/2 terms re-expressed through Z1h - Z4h
    let mut problem = Observable::new(n);
    for i in 3..=n0 {
        problem.add(w0, &[(phys(i), Z)])?;
    }
    for j in (n0 + 1)..=n_log {
        problem.add(w1, &[(phys(j), Z)])?;
    }
    for i in 3..=n0 {
        for j in (n0 + 1)..=n_log {
            problem.add(inst.jzz, &[(phys(i), Z), (phys(j), Z)])?;
        }
    }
    problem.add(w0, &[(1, Z)])?;
    problem.add(-w0, &[(4, Z)])?;
    for j in (n0 + 1)..=n_log {
        problem.add(inst.jzz, &[(phys(j), Z), (1, Z)])?;
        problem.add(-inst.jzz, &[(phys(j), Z), (4, Z)])?;
    }

    let mut sched = ScheduledObservable::new(n, inst.cp);
    sched.push_group(ScheduleKind::Constant, penalty)?;
    sched.push_group(ScheduleKind::OneMinusSOver2Cp, plain_drive)?;
    sched.push_group(ScheduleKind::SqrtOneMinusS, gadget_drive)?;
    sched.push_group(ScheduleKind::SOver2Cp, problem)?;

    let mut roles = vec![
        QubitRole::Gadget(1),
        QubitRole::Gadget(2),
        QubitRole::Gadget(3),
        QubitRole::Gadget(4),
    ];
    roles.extend((3..=n_log).map(|q| QubitRole::Problem { logical: q }));
    Ok((sched, QubitLayout { roles }))
}

/// Homogeneous-driving variant: every logical qubit `q >= 3` becomes a
/// ferromagnetic pair, and all physical qubits share the `sqrt(1-s)` drive.
fn build_one_hot_hom(inst: &ToyInstance) -> Result<(ScheduledObservable, QubitLayout)> {
    let n0 = inst.n0;
    let n_log = inst.n_logical();
    let n = 4 * n0 + 2;
    let p1 = |q: u32| 4 + 2 * (q - 3) + 1;
    let p2 = |q: u32| 4 + 2 * (q - 3) + 2;
    let (w0, w1) = inst.field_weights();

    let mut penalty = Observable::new(n);
    for (c, f) in one_hot_penalty(inst.cp, [1, 2, 3, 4])? {
        penalty.add(c, &f)?;
    }
    for q in 3..=n_log {
        penalty.add(-2.0 * inst.cp, &[(p1(q), Z), (p2(q), Z)])?;
    }

    let mut drive = Observable::new(n);
    for q in 1..=n {
        drive.add(-1.0, &[(q, X)])?;
    }

    // H_p,hom^OH with (Z^(1) + Z^(2))/2 substituted for each chained qubit
    let mut problem = Observable::new(n);
    for i in 3..=n0 {
        problem.add(w0 / 2.0, &[(p1(i), Z)])?;
        problem.add(w0 / 2.0, &[(p2(i), Z)])?;
    }
    for j in (n0 + 1)..=n_log {
        problem.add(w1 / 2.0, &[(p1(j), Z)])?;
        problem.add(w1 / 2.0, &[(p2(j), Z)])?;
    }
    for i in 3..=n0 {
        for j in (n0 + 1)..=n_log {
            for a in [p1(i), p2(i)] {
                for b in [p1(j), p2(j)] {
                    problem.add(inst.jzz / 4.0, &[(a, Z), (b, Z)])?;
                }
            }
        }
    }
    problem.add(w0, &[(1, Z)])?;
    problem.add(-w0, &[(4, Z)])?;
    for j in (n0 + 1)..=n_log {
        for a in [p1(j), p2(j)] {
            problem.add(inst.jzz / 2.0, &[(a, Z), (1, Z)])?;
            problem.add(-inst.jzz / 2.0, &[(a, Z), (4, Z)])?;
        }
    }

    let mut sched = ScheduledObservable::new(n, inst.cp);
    sched.push_group(ScheduleKind::Constant, penalty)?;
    sched.push_group(ScheduleKind::SqrtOneMinusS, drive)?;
    sched.push_group(ScheduleKind::SOver2Cp, problem)?;

    let mut roles = vec![
        QubitRole::Gadget(1),
        QubitRole::Gadget(2),
        QubitRole::Gadget(3),
        QubitRole::Gadget(4),
    ];
    for q in 3..=n_log {
        roles.push(QubitRole::ChainLeg { logical: q, leg: 1 });
        roles.push(QubitRole::ChainLeg { logical: q, leg: 2 });
    }
    Ok((sched, QubitLayout { roles }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::assemble;

    #[test]
    fn field_weights_n0_2() {
        let inst = ToyInstance::new(2, Variant::Tf);
        let (w0, w1) = inst.field_weights();
        assert!((w0 - 14.89).abs() < 1e-12);
        assert!((w1 - (2.0 * 5.33 - 2.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn problem_term_counts() {
        let inst = ToyInstance::new(2, Variant::Tf);
        let obs = build_problem(&inst).unwrap();
        let zz: Vec<_> = obs.terms().iter().filter(|t| t.arity() == 2).collect();
        assert_eq!(zz.len(), 6, "complete bipartite 2x3");
        for t in zz {
            assert_eq!(t.coefficient(), 5.33);
        }
    }

    #[test]
    fn small_n0_rejected() {
        let inst = ToyInstance::new(1, Variant::Tf);
        assert!(build_problem(&inst).is_err());
        assert!(build_anneal(&inst).is_err());
    }

    #[test]
    fn gadget_variant_rejected_by_build_problem() {
        assert!(build_problem(&ToyInstance::new(3, Variant::OneHot)).is_err());
    }

    #[test]
    fn problem_ground_state_selects_g0() {
        // brute-force enumeration of the diagonal problem Hamiltonian
        for n0 in [2u32, 3, 4] {
            let inst = ToyInstance::new(n0, Variant::Tf);
            let h = assemble(&build_problem(&inst).unwrap());
            let diag = h.diagonal();
            let mut argmin = 0;
            for (i, d) in diag.iter().enumerate() {
                if d.re < diag[argmin].re {
                    argmin = i;
                }
            }
            // G_0 spins up (bits 0), G_1 bits 1: index = 2^(n0+1) - 1
            let expect = (1usize << (n0 + 1)) - 1;
            assert_eq!(argmin, expect, "n0 = {n0}");
        }
    }

    #[test]
    fn tf_layout_and_driver() {
        let inst = ToyInstance::new(10, Variant::Tf);
        let (sched, layout) = build_anneal(&inst).unwrap();
        assert_eq!(layout.n_qubits(), 21);
        let h0 = sched.evaluate_at(0.0).unwrap();
        let live: Vec<_> = h0.terms().iter().filter(|t| t.coefficient() != 0.0).collect();
        assert_eq!(live.len(), 21);
        for t in live {
            assert_eq!(t.coefficient(), -1.0);
            assert_eq!(t.arity(), 1);
        }
    }

    #[test]
    fn tf_endpoints() {
        let inst = ToyInstance::new(2, Variant::Tf);
        let (sched, _) = build_anneal(&inst).unwrap();
        let h1 = sched.evaluate_at(1.0).unwrap();
        // driver scaled to zero, problem at full strength
        let driver_live = h1
            .terms()
            .iter()
            .any(|t| t.coefficient() != 0.0 && t.factors().iter().any(|(_, a)| *a == X));
        assert!(!driver_live);
        let problem = build_problem(&inst).unwrap();
        let diff = assemble(&h1).to_dense() - assemble(&problem).to_dense();
        assert!(diff.norm() < 1e-12);
    }

    #[test]
    fn xx_variant_adds_pair_drive() {
        let inst = ToyInstance::new(2, Variant::Xx);
        let (sched, _) = build_anneal(&inst).unwrap();
        let h0 = sched.evaluate_at(0.0).unwrap();
        let pair: Vec<_> = h0.terms().iter().filter(|t| t.arity() == 2 && t.coefficient() != 0.0).collect();
        assert_eq!(pair.len(), 1);
        assert_eq!(pair[0].coefficient(), -1.0);
        assert_eq!(pair[0].factors()[0].0, 1);
        assert_eq!(pair[0].factors()[1].0, 2);
    }

    #[test]
    fn one_hot_layout_and_penalty() {
        let inst = ToyInstance::new(4, Variant::OneHot);
        let (sched, layout) = build_anneal(&inst).unwrap();
        assert_eq!(layout.n_qubits(), 11);
        assert_eq!(
            layout.roles()[..4],
            [QubitRole::Gadget(1), QubitRole::Gadget(2), QubitRole::Gadget(3), QubitRole::Gadget(4)]
        );
        // six gadget ZZ penalty couplings of strength 2 Cp
        let (kind, penalty) = &sched.groups()[0];
        assert_eq!(*kind, ScheduleKind::Constant);
        let strong: Vec<_> = penalty
            .terms()
            .iter()
            .filter(|t| t.arity() == 2 && t.coefficient() == 200.0)
            .collect();
        assert_eq!(strong.len(), 6);
        for t in strong {
            assert!(t.factors().iter().all(|(q, _)| *q <= 4));
        }
    }

    #[test]
    fn one_hot_endpoint_schedules() {
        let inst = ToyInstance::new(2, Variant::OneHot);
        let (sched, _) = build_anneal(&inst).unwrap();
        let h1 = sched.evaluate_at(1.0).unwrap();
        // sqrt(1-s) and (1-s)/2Cp vanish at s = 1
        let x_live = h1
            .terms()
            .iter()
            .any(|t| t.coefficient() != 0.0 && t.factors().iter().any(|(_, a)| *a == X));
        assert!(!x_live);
    }

    #[test]
    fn one_hot_hom_layout_and_chains() {
        let inst = ToyInstance::new(4, Variant::OneHotHom);
        let (sched, layout) = build_anneal(&inst).unwrap();
        assert_eq!(layout.n_qubits(), 18);
        let (_, penalty) = &sched.groups()[0];
        let ferro: Vec<_> = penalty
            .terms()
            .iter()
            .filter(|t| t.coefficient() == -200.0)
            .collect();
        assert_eq!(ferro.len(), 7, "one chain per remaining logical qubit");
        // homogeneous drive: exactly one -X per physical qubit
        let (kind, drive) = &sched.groups()[1];
        assert_eq!(*kind, ScheduleKind::SqrtOneMinusS);
        assert_eq!(drive.terms().len(), 18);
        let mut seen = vec![false; 18];
        for t in drive.terms() {
            assert_eq!(t.coefficient(), -1.0);
            assert_eq!(t.arity(), 1);
            let (q, a) = t.factors()[0];
            assert_eq!(a, X);
            assert!(!seen[q as usize - 1]);
            seen[q as usize - 1] = true;
        }
        assert!(seen.iter().all(|b| *b));
    }

    #[test]
    fn qubit_count_invariants() {
        for n0 in 2..=10u32 {
            let count = |v: Variant| {
                build_anneal(&ToyInstance::new(n0, v)).unwrap().1.n_qubits()
            };
            assert_eq!(count(Variant::Tf), 2 * n0 + 1);
            assert_eq!(count(Variant::Xx), 2 * n0 + 1);
            assert_eq!(count(Variant::OneHot), 2 * n0 + 3);
            assert_eq!(count(Variant::OneHotHom), 4 * n0 + 2);
        }
    }

    #[test]
    fn constraint_partition_sizes() {
        let (_, layout) = build_anneal(&ToyInstance::new(2, Variant::OneHot)).unwrap();
        let p = layout.constraint_partition().unwrap();
        // 4 one-hot states x 2^3 plain states
        assert_eq!(p.indices_a().len(), 32);

        let (_, layout) = build_anneal(&ToyInstance::new(2, Variant::OneHotHom)).unwrap();
        let p = layout.constraint_partition().unwrap();
        // 4 x 2^3 (each chain has two valid states)
        assert_eq!(p.indices_a().len(), 32);

        let (_, layout) = build_anneal(&ToyInstance::new(2, Variant::Tf)).unwrap();
        assert!(layout.constraint_partition().is_none());
    }

    #[test]
    fn variant_parsing() {
        assert_eq!(Variant::parse("TF").unwrap(), Variant::Tf);
        assert_eq!(Variant::parse("onehot-hom").unwrap(), Variant::OneHotHom);
        assert!(Variant::parse("bogus").is_err());
    }
}
