//! Weighted Pauli strings and sums of them.
//!
//! Qubit indices are 1-based in the public interface. The basis convention
//! places qubit 1 as the *most significant* bit of a computational-basis
//! index, so `|b1 b2 .. bn>` has index `sum_q b_q * 2^(n-q)`. Every other
//! module obtains bit positions through [`qubit_mask`], which owns this
//! convention.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Bit mask of a 1-based qubit index inside an `n_qubits` register.
///
/// Qubit 1 maps to the most significant bit.
#[inline]
pub fn qubit_mask(qubit: u32, n_qubits: u32) -> usize {
    debug_assert!(qubit >= 1 && qubit <= n_qubits);
    1usize << (n_qubits - qubit)
}

/// Single-qubit Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PauliAxis {
    I,
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub fn label(self) -> char {
        match self {
            PauliAxis::I => 'I',
            PauliAxis::X => 'X',
            PauliAxis::Y => 'Y',
            PauliAxis::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Result<Self> {
        match c {
            'I' => Ok(PauliAxis::I),
            'X' => Ok(PauliAxis::X),
            'Y' => Ok(PauliAxis::Y),
            'Z' => Ok(PauliAxis::Z),
            _ => Err(Error::Parse(format!("unknown Pauli axis '{c}'"))),
        }
    }

    /// True for axes that flip the computational-basis bit (X, Y).
    fn flips(self) -> bool {
        matches!(self, PauliAxis::X | PauliAxis::Y)
    }

    /// True for axes that contribute a (-1)^bit sign (Z, Y).
    fn signs(self) -> bool {
        matches!(self, PauliAxis::Z | PauliAxis::Y)
    }
}

/// One weighted tensor product of single-qubit Pauli operators.
///
/// Absent qubits act as identity. The coefficient is real, so the term is
/// Hermitian by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    coefficient: f64,
    factors: Vec<(u32, PauliAxis)>,
}

impl PauliTerm {
    /// Builds a term, dropping explicit identity factors, sorting factors by
    /// qubit index and rejecting duplicate indices or non-finite coefficients.
    pub fn new(coefficient: f64, factors: &[(u32, PauliAxis)]) -> Result<Self> {
        if !coefficient.is_finite() {
            return Err(Error::NonFiniteCoefficient);
        }
        let mut fs: Vec<(u32, PauliAxis)> = factors
            .iter()
            .copied()
            .filter(|(_, a)| *a != PauliAxis::I)
            .collect();
        fs.sort_by_key(|(q, _)| *q);
        for w in fs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::DuplicateIndex(w[0].0));
            }
        }
        if let Some((q, _)) = fs.first() {
            if *q == 0 {
                return Err(Error::IndexOutOfRange { index: 0, n_qubits: 0 });
            }
        }
        Ok(Self { coefficient, factors: fs })
    }

    /// A multiple of the identity.
    pub fn identity(coefficient: f64) -> Self {
        Self { coefficient, factors: Vec::new() }
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn factors(&self) -> &[(u32, PauliAxis)] {
        &self.factors
    }

    /// Number of non-identity factors.
    pub fn arity(&self) -> usize {
        self.factors.len()
    }

    /// Largest qubit index referenced, or 0 for an identity term.
    pub fn max_qubit(&self) -> u32 {
        self.factors.last().map_or(0, |(q, _)| *q)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { coefficient: self.coefficient * factor, factors: self.factors.clone() }
    }

    /// Row-action masks for matrix assembly: the entry in row `r` sits at
    /// column `r ^ flip_mask` with value
    /// `coefficient * phase * (-1)^popcount(r & sign_mask)`.
    pub(crate) fn masks(&self, n_qubits: u32) -> TermMasks {
        let mut flip_mask = 0usize;
        let mut sign_mask = 0usize;
        let mut y_count = 0u32;
        for &(q, a) in &self.factors {
            let m = qubit_mask(q, n_qubits);
            if a.flips() {
                flip_mask |= m;
            }
            if a.signs() {
                sign_mask |= m;
            }
            if a == PauliAxis::Y {
                y_count += 1;
            }
        }
        // each Y contributes a factor -i relative to its (-1)^bit sign
        let phase = match y_count % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, -1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, 1.0),
        };
        TermMasks { flip_mask, sign_mask, scale: phase * self.coefficient }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TermMasks {
    pub flip_mask: usize,
    pub sign_mask: usize,
    pub scale: Complex64,
}

impl TermMasks {
    #[inline]
    pub fn value(&self, row: usize) -> Complex64 {
        if (row & self.sign_mask).count_ones() % 2 == 0 {
            self.scale
        } else {
            -self.scale
        }
    }
}

/// A sum of Pauli terms on a fixed register; Hermitian by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    n_qubits: u32,
    terms: Vec<PauliTerm>,
}

impl Observable {
    pub fn new(n_qubits: u32) -> Self {
        assert!(n_qubits >= 1, "observable needs at least one qubit");
        Self { n_qubits, terms: Vec::new() }
    }

    pub fn with_terms(n_qubits: u32, terms: Vec<PauliTerm>) -> Result<Self> {
        let mut obs = Self::new(n_qubits);
        for t in terms {
            obs.push(t)?;
        }
        Ok(obs)
    }

    pub fn push(&mut self, term: PauliTerm) -> Result<()> {
        let m = term.max_qubit();
        if m > self.n_qubits {
            return Err(Error::IndexOutOfRange { index: m, n_qubits: self.n_qubits });
        }
        self.terms.push(term);
        Ok(())
    }

    /// Convenience for `push(PauliTerm::new(..))`.
    pub fn add(&mut self, coefficient: f64, factors: &[(u32, PauliAxis)]) -> Result<()> {
        self.push(PauliTerm::new(coefficient, factors)?)
    }

    pub fn n_qubits(&self) -> u32 {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest number of non-identity factors over all terms.
    pub fn max_arity(&self) -> usize {
        self.terms.iter().map(PauliTerm::arity).max().unwrap_or(0)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|t| t.scaled(factor)).collect(),
        }
    }

    /// Concatenation of term lists; both observables must share the register.
    pub fn extended(&self, other: &Observable) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::InvalidParameter(format!(
                "cannot concatenate observables on {} and {} qubits",
                self.n_qubits, other.n_qubits
            )));
        }
        let mut obs = self.clone();
        obs.terms.extend(other.terms.iter().cloned());
        Ok(obs)
    }

    /// Line-oriented text form: one term per line, `coeff op@q op@q ...`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for t in &self.terms {
            out.push_str(&format!("{:?}", t.coefficient()));
            for &(q, a) in t.factors() {
                out.push_str(&format!(" {}@{}", a.label(), q));
            }
            out.push('\n');
        }
        out
    }

    /// Parses the `to_text` format. Empty lines and `#` comments are skipped.
    /// When `n_qubits` is `None` the register size is inferred from the
    /// largest index present.
    pub fn parse_text(text: &str, n_qubits: Option<u32>) -> Result<Self> {
        let mut parsed: Vec<PauliTerm> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let coeff_tok = tokens.next().unwrap();
            let coefficient: f64 = coeff_tok
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad coefficient '{coeff_tok}'", lineno + 1)))?;
            let mut factors = Vec::new();
            for tok in tokens {
                let (axis, qubit) = tok
                    .split_once('@')
                    .ok_or_else(|| Error::Parse(format!("line {}: expected op@qubit, got '{tok}'", lineno + 1)))?;
                let mut chars = axis.chars();
                let c = chars
                    .next()
                    .filter(|_| chars.next().is_none())
                    .ok_or_else(|| Error::Parse(format!("line {}: bad operator '{axis}'", lineno + 1)))?;
                let q: u32 = qubit
                    .parse()
                    .map_err(|_| Error::Parse(format!("line {}: bad qubit index '{qubit}'", lineno + 1)))?;
                if q == 0 {
                    return Err(Error::Parse(format!("line {}: qubit indices are 1-based", lineno + 1)));
                }
                factors.push((q, PauliAxis::from_char(c)?));
            }
            parsed.push(PauliTerm::new(coefficient, &factors)?);
        }
        let needed = parsed.iter().map(PauliTerm::max_qubit).max().unwrap_or(1).max(1);
        let n = n_qubits.unwrap_or(needed);
        Self::with_terms(n, parsed)
    }
}
