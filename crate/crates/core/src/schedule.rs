//! Schedule-tagged observables representing annealing Hamiltonians `H(s)`.

use crate::error::{Error, Result};
use crate::pauli::Observable;
use crate::sparse::{SparseOperator, WeightedSumOp};

/// Schedule function attached to one group of terms, evaluated on the
/// normalized time `s` in `[0, 1]`. The `..Over2Cp` kinds divide by `2 C_p`
/// of the owning [`ScheduledObservable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    Constant,
    OneMinusS,
    SqrtOneMinusS,
    S,
    SOver2Cp,
    OneMinusSOver2Cp,
}

impl ScheduleKind {
    pub fn evaluate(self, s: f64, cp: f64) -> f64 {
        match self {
            ScheduleKind::Constant => 1.0,
            ScheduleKind::OneMinusS => 1.0 - s,
            ScheduleKind::SqrtOneMinusS => (1.0 - s).sqrt(),
            ScheduleKind::S => s,
            ScheduleKind::SOver2Cp => s / (2.0 * cp),
            ScheduleKind::OneMinusSOver2Cp => (1.0 - s) / (2.0 * cp),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ScheduleKind::Constant => "constant",
            ScheduleKind::OneMinusS => "1-s",
            ScheduleKind::SqrtOneMinusS => "sqrt(1-s)",
            ScheduleKind::S => "s",
            ScheduleKind::SOver2Cp => "s/2Cp",
            ScheduleKind::OneMinusSOver2Cp => "(1-s)/2Cp",
        }
    }
}

/// A sum of observables, each tagged with a schedule function of `s`.
#[derive(Debug, Clone)]
pub struct ScheduledObservable {
    n_qubits: u32,
    cp: f64,
    groups: Vec<(ScheduleKind, Observable)>,
}

impl ScheduledObservable {
    pub fn new(n_qubits: u32, cp: f64) -> Self {
        Self { n_qubits, cp, groups: Vec::new() }
    }

    pub fn push_group(&mut self, kind: ScheduleKind, obs: Observable) -> Result<()> {
        if obs.n_qubits() != self.n_qubits {
            return Err(Error::InvalidParameter(format!(
                "group on {} qubits does not match schedule register of {}",
                obs.n_qubits(),
                self.n_qubits
            )));
        }
        self.groups.push((kind, obs));
        Ok(())
    }

    pub fn n_qubits(&self) -> u32 {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }

    pub fn cp(&self) -> f64 {
        self.cp
    }

    pub fn groups(&self) -> &[(ScheduleKind, Observable)] {
        &self.groups
    }

    /// `sum_g schedule_g(s) * obs_g` as a plain observable.
    pub fn evaluate_at(&self, s: f64) -> Result<Observable> {
        check_s(s)?;
        let mut out = Observable::new(self.n_qubits);
        for (kind, obs) in &self.groups {
            let w = kind.evaluate(s, self.cp);
            out = out.extended(&obs.scaled(w))?;
        }
        Ok(out)
    }

    /// Assembles each group once so that `H(s)` applications reuse the
    /// matrices across many values of `s`.
    pub fn compile(&self) -> CompiledSchedule {
        CompiledSchedule {
            cp: self.cp,
            dim: self.dim(),
            parts: self.groups.iter().map(|(k, o)| (*k, SparseOperator::assemble(o))).collect(),
        }
    }
}

fn check_s(s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::ScheduleOutOfRange(s));
    }
    Ok(())
}

/// Per-group assembled matrices of a [`ScheduledObservable`].
pub struct CompiledSchedule {
    cp: f64,
    dim: usize,
    parts: Vec<(ScheduleKind, SparseOperator)>,
}

impl CompiledSchedule {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cp(&self) -> f64 {
        self.cp
    }

    /// Borrowed weighted-sum view of `H(s)`, cheap to construct per point.
    pub fn operator_at(&self, s: f64) -> Result<WeightedSumOp<'_>> {
        check_s(s)?;
        Ok(WeightedSumOp::new(
            self.parts.iter().map(|(k, op)| (k.evaluate(s, self.cp), op)).collect(),
        ))
    }

    /// Spectral-norm upper bound of `H(s)` maximized over the schedule
    /// endpoints and the given point.
    pub fn norm_bound_at(&self, s: f64) -> f64 {
        self.parts
            .iter()
            .map(|(k, op)| k.evaluate(s, self.cp).abs() * op.norm_bound())
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliAxis::{X, Z};

    #[test]
    fn schedule_values() {
        let cp = 100.0;
        assert_eq!(ScheduleKind::Constant.evaluate(0.3, cp), 1.0);
        assert_eq!(ScheduleKind::OneMinusS.evaluate(0.3, cp), 0.7);
        assert!((ScheduleKind::SqrtOneMinusS.evaluate(0.19, cp) - 0.9).abs() < 1e-15);
        assert_eq!(ScheduleKind::S.evaluate(0.3, cp), 0.3);
        assert_eq!(ScheduleKind::SOver2Cp.evaluate(0.3, cp), 0.3 / 200.0);
        assert_eq!(ScheduleKind::OneMinusSOver2Cp.evaluate(0.3, cp), 0.7 / 200.0);
    }

    #[test]
    fn evaluate_sums_groups() {
        let mut drv = Observable::new(2);
        drv.add(-1.0, &[(1, X)]).unwrap();
        let mut prob = Observable::new(2);
        prob.add(3.0, &[(1, Z), (2, Z)]).unwrap();
        let mut sched = ScheduledObservable::new(2, 100.0);
        sched.push_group(ScheduleKind::OneMinusS, drv).unwrap();
        sched.push_group(ScheduleKind::S, prob).unwrap();

        let h0 = sched.evaluate_at(0.0).unwrap();
        assert_eq!(h0.terms()[0].coefficient(), -1.0);
        assert_eq!(h0.terms()[1].coefficient(), 0.0);

        let h1 = sched.evaluate_at(1.0).unwrap();
        assert_eq!(h1.terms()[0].coefficient(), 0.0);
        assert_eq!(h1.terms()[1].coefficient(), 3.0);
    }

    #[test]
    fn s_range_enforced() {
        let sched = ScheduledObservable::new(1, 100.0);
        assert!(matches!(sched.evaluate_at(-0.1), Err(Error::ScheduleOutOfRange(_))));
        assert!(matches!(sched.evaluate_at(1.1), Err(Error::ScheduleOutOfRange(_))));
    }

    #[test]
    fn group_register_mismatch_rejected() {
        let mut sched = ScheduledObservable::new(2, 100.0);
        assert!(sched.push_group(ScheduleKind::S, Observable::new(3)).is_err());
    }

    #[test]
    fn compiled_matches_direct_assembly() {
        let mut drv = Observable::new(3);
        for q in 1..=3 {
            drv.add(-1.0, &[(q, X)]).unwrap();
        }
        let mut prob = Observable::new(3);
        prob.add(2.0, &[(1, Z), (3, Z)]).unwrap();
        let mut sched = ScheduledObservable::new(3, 50.0);
        sched.push_group(ScheduleKind::OneMinusS, drv).unwrap();
        sched.push_group(ScheduleKind::SOver2Cp, prob).unwrap();

        let compiled = sched.compile();
        let s = 0.37;
        let direct = SparseOperator::assemble(&sched.evaluate_at(s).unwrap());
        let view = compiled.operator_at(s).unwrap();
        let psi = crate::state::StateVector::uniform(8);
        let mut a = vec![num_complex::Complex64::new(0.0, 0.0); 8];
        let mut b = a.clone();
        use crate::sparse::HermitianOp;
        direct.apply_into(psi.amplitudes(), &mut a);
        view.apply_into(psi.amplitudes(), &mut b);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-14);
        }
    }
}
