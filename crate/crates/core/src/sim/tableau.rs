use rand::Rng;

use super::gate::Gate;
use super::pauli::{Pauli, PauliString, MAX_QUBITS};
use crate::error::{Error, Result};

/// Stabilizer state on `n` qubits in destabilizer/stabilizer form.
///
/// Rows `0..n` are destabilizers, rows `n..2n` stabilizers. Row `i` and row
/// `n + i` anticommute; every other pair commutes.
#[derive(Clone, Debug)]
pub struct Tableau {
    n: usize,
    rows: Vec<PauliString>,
}

impl Tableau {
    /// The computational basis state `|0…0⟩`.
    pub fn new(n: usize) -> Self {
        assert!(n <= MAX_QUBITS, "at most {MAX_QUBITS} qubits are supported");
        let mut rows = Vec::with_capacity(2 * n);
        rows.extend((0..n).map(|q| PauliString::single(n, q, Pauli::X)));
        rows.extend((0..n).map(|q| PauliString::single(n, q, Pauli::Z)));
        Self { n, rows }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn stabilizers(&self) -> &[PauliString] {
        &self.rows[self.n..]
    }

    pub fn destabilizers(&self) -> &[PauliString] {
        &self.rows[..self.n]
    }

    fn check(&self, q: usize) -> Result<()> {
        if q >= self.n {
            Err(Error::QubitOutOfRange { qubit: q, n: self.n })
        } else {
            Ok(())
        }
    }

    pub fn apply(&mut self, gate: Gate, targets: &[usize]) -> Result<()> {
        if targets.len() != gate.arity() {
            return Err(Error::InvalidInput(format!("{gate:?} takes {} target(s), got {}", gate.arity(), targets.len())));
        }
        for &q in targets {
            self.check(q)?;
        }
        if gate.arity() == 2 && targets[0] == targets[1] {
            return Err(Error::InvalidInput("two-qubit gate on a single qubit".into()));
        }
        for row in &mut self.rows {
            row.conjugate(gate, targets);
        }
        Ok(())
    }

    /// Applies an arbitrary Pauli operator to the state.
    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        self.check_size(p)?;
        for row in &mut self.rows[self.n..] {
            if !row.commutes_with(p) {
                *row = row.negate();
            }
        }
        Ok(())
    }

    fn check_size(&self, p: &PauliString) -> Result<()> {
        if p.num_qubits() != self.n {
            Err(Error::SizeMismatch { expected: self.n, got: p.num_qubits() })
        } else {
            Ok(())
        }
    }

    /// Index of a stabilizer row anticommuting with `Z_q`, if any.
    fn random_pivot(&self, q: usize) -> Option<usize> {
        (self.n..2 * self.n).find(|&i| self.rows[i].x_mask() >> q & 1 == 1)
    }

    /// True when measuring `Z_q` has a deterministic outcome.
    pub fn is_deterministic_z(&self, q: usize) -> Result<bool> {
        self.check(q)?;
        Ok(self.random_pivot(q).is_none())
    }

    /// Measures `Z_q`, returning `+1` or `−1` and projecting the state.
    pub fn measure_z<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<i8> {
        self.check(q)?;
        match self.random_pivot(q) {
            Some(p) => {
                let value = if rng.random::<bool>() { 1 } else { -1 };
                self.collapse(q, p, value);
                Ok(value)
            }
            None => Ok(self.deterministic_value(&PauliString::single(self.n, q, Pauli::Z))),
        }
    }

    /// Projects onto the `Z_q = value` eigenspace.
    ///
    /// Returns `Ok(false)` when the outcome was deterministic and differs from
    /// `value` (the projection has zero norm and the state is unchanged).
    pub fn project_z(&mut self, q: usize, value: i8) -> Result<bool> {
        self.check(q)?;
        match self.random_pivot(q) {
            Some(p) => {
                self.collapse(q, p, value);
                Ok(true)
            }
            None => Ok(self.deterministic_value(&PauliString::single(self.n, q, Pauli::Z)) == value),
        }
    }

    fn collapse(&mut self, q: usize, p: usize, value: i8) {
        let pivot = self.rows[p];
        for i in 0..2 * self.n {
            if i != p && self.rows[i].x_mask() >> q & 1 == 1 {
                let prod = self.rows[i] * pivot;
                // Destabilizer signs carry no information; keep them Hermitian.
                self.rows[i] = if i < self.n { prod.unsigned() } else { prod };
            }
        }
        self.rows[p - self.n] = pivot;
        let z = PauliString::single(self.n, q, Pauli::Z);
        self.rows[p] = if value < 0 { z.negate() } else { z };
    }

    /// Sign of `p` inside the stabilizer group; `p` must commute with every
    /// stabilizer.
    fn deterministic_value(&self, p: &PauliString) -> i8 {
        let mut acc = PauliString::identity(self.n);
        for i in 0..self.n {
            if !self.rows[i].commutes_with(p) {
                acc = acc * self.rows[self.n + i];
            }
        }
        debug_assert_eq!(acc.x_mask(), p.x_mask());
        debug_assert_eq!(acc.z_mask(), p.z_mask());
        let a = acc.sign().expect("product of commuting Hermitian rows is Hermitian");
        let b = p.sign().unwrap_or(1);
        a * b
    }

    /// `⟨p⟩` for a Hermitian Pauli: `±1` if `±p` stabilizes the state, else 0.
    pub fn expectation(&self, p: &PauliString) -> Result<i8> {
        self.check_size(p)?;
        if p.sign().is_none() {
            return Err(Error::InvalidInput(format!("{p} is not Hermitian")));
        }
        if self.stabilizers().iter().any(|s| !s.commutes_with(p)) {
            return Ok(0);
        }
        Ok(self.deterministic_value(p))
    }
}
