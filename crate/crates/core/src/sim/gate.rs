use super::pauli::PauliString;

/// Clifford gates supported by the tableau and the frame simulator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    H,
    S,
    Sdg,
    /// `R_y(π/2)`: maps `Z → X` and `X → −Z` under conjugation.
    SqrtY,
    /// `R_y(−π/2)`: maps `Z → −X` and `X → Z`.
    SqrtYdg,
    X,
    Y,
    Z,
    Cz,
    Cx,
}

impl Gate {
    pub fn arity(self) -> usize {
        match self {
            Gate::Cz | Gate::Cx => 2,
            _ => 1,
        }
    }

    pub fn is_pauli(self) -> bool {
        matches!(self, Gate::X | Gate::Y | Gate::Z)
    }

    pub fn inverse(self) -> Gate {
        match self {
            Gate::S => Gate::Sdg,
            Gate::Sdg => Gate::S,
            Gate::SqrtY => Gate::SqrtYdg,
            Gate::SqrtYdg => Gate::SqrtY,
            g => g,
        }
    }

    pub const ALL: [Gate; 10] =
        [Gate::H, Gate::S, Gate::Sdg, Gate::SqrtY, Gate::SqrtYdg, Gate::X, Gate::Y, Gate::Z, Gate::Cz, Gate::Cx];
}

impl PauliString {
    /// Replaces `self` by `U · self · U†`.
    ///
    /// `targets` holds one qubit for single-qubit gates and `(control, target)`
    /// for two-qubit gates; the caller guarantees they are in range and distinct.
    pub fn conjugate(&mut self, gate: Gate, targets: &[usize]) {
        let q = targets[0];
        let (x, z) = (self.x_mask() >> q & 1 == 1, self.z_mask() >> q & 1 == 1);
        let b = |v: bool| v as u32;
        match gate {
            Gate::H => {
                self.set_bits(q, z, x);
                self.add_phase(2 * (b(x) & b(z)));
            }
            Gate::S => {
                self.set_bits(q, x, z ^ x);
                self.add_phase(b(x));
            }
            Gate::Sdg => {
                // S† X S = −Y = −i X Z
                self.set_bits(q, x, z ^ x);
                self.add_phase(3 * b(x));
            }
            Gate::SqrtY => {
                self.set_bits(q, z, x);
                self.add_phase(2 * (b(x) & (1 ^ b(z))));
            }
            Gate::SqrtYdg => {
                self.set_bits(q, z, x);
                self.add_phase(2 * (b(z) & (1 ^ b(x))));
            }
            Gate::X => self.add_phase(2 * b(z)),
            Gate::Z => self.add_phase(2 * b(x)),
            Gate::Y => self.add_phase(2 * (b(x) ^ b(z))),
            Gate::Cz => {
                let t = targets[1];
                let (xt, zt) = (self.x_mask() >> t & 1 == 1, self.z_mask() >> t & 1 == 1);
                self.set_bits(q, x, z ^ xt);
                self.set_bits(t, xt, zt ^ x);
                self.add_phase(2 * (b(x) & b(xt)));
            }
            Gate::Cx => {
                let t = targets[1];
                let (xt, zt) = (self.x_mask() >> t & 1 == 1, self.z_mask() >> t & 1 == 1);
                self.set_bits(q, x, z ^ zt);
                self.set_bits(t, xt ^ x, zt);
            }
        }
    }
}
