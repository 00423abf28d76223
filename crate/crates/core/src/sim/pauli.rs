use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use crate::error::Error;

/// Largest register a [`PauliString`] can describe.
pub const MAX_QUBITS: usize = 64;

/// Single-qubit Pauli label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const NON_IDENTITY: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    /// (x, z) bits of the symplectic representation.
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// An `n`-qubit Pauli operator `i^phase · ∏_j X_j^{x_j} Z_j^{z_j}`.
///
/// The X factor is written to the left of the Z factor on every qubit, so a
/// Hermitian `Y_j` carries one unit of phase (`Y = i·X·Z`). Products and
/// conjugations keep the phase exact modulo 4.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: u8,
    x: u64,
    z: u64,
    phase: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        assert!(n <= MAX_QUBITS, "at most {MAX_QUBITS} qubits are supported");
        Self { n: n as u8, x: 0, z: 0, phase: 0 }
    }

    /// Builds a Hermitian operator with sign +1 from raw masks.
    pub fn from_masks(n: usize, x: u64, z: u64) -> Self {
        let mut p = Self::identity(n);
        let mask = p.register_mask();
        p.x = x & mask;
        p.z = z & mask;
        p.phase = ((p.x & p.z).count_ones() % 4) as u8;
        p
    }

    pub fn single(n: usize, qubit: usize, pauli: Pauli) -> Self {
        assert!(qubit < n, "qubit {qubit} out of range for {n} qubits");
        let (x, z) = pauli.bits();
        Self::from_masks(n, (x as u64) << qubit, (z as u64) << qubit)
    }

    /// Product of the same Pauli on every listed qubit.
    pub fn uniform(n: usize, qubits: &[usize], pauli: Pauli) -> Self {
        qubits.iter().fold(Self::identity(n), |acc, &q| acc * Self::single(n, q, pauli))
    }

    pub fn num_qubits(&self) -> usize {
        self.n as usize
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    /// Phase exponent `k` in `i^k`.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn weight(&self) -> usize {
        self.support().count_ones() as usize
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.support() == 0
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        Pauli::from_bits(self.x >> qubit & 1 == 1, self.z >> qubit & 1 == 1)
    }

    /// True when the operator is Hermitian, i.e. its overall sign is real.
    pub fn is_hermitian(&self) -> bool {
        (self.phase as u32 + 4 - (self.x & self.z).count_ones() % 4).is_multiple_of(2)
    }

    /// Sign of a Hermitian operator relative to the tensor product of
    /// Hermitian single-qubit Paulis: `+1` or `-1`; `None` if not Hermitian.
    pub fn sign(&self) -> Option<i8> {
        let rel = (self.phase as u32 + 4 - (self.x & self.z).count_ones() % 4) % 4;
        match rel {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    pub fn negate(mut self) -> Self {
        self.phase = (self.phase + 2) % 4;
        self
    }

    /// Same operator with the sign reset to +1 (Hermitian form).
    pub fn unsigned(&self) -> Self {
        Self::from_masks(self.n as usize, self.x, self.z)
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        debug_assert_eq!(self.n, other.n);
        ((self.x & other.z) ^ (self.z & other.x)).count_ones().is_multiple_of(2)
    }

    pub(crate) fn add_phase(&mut self, k: u32) {
        self.phase = ((self.phase as u32 + k) % 4) as u8;
    }

    pub(crate) fn set_bits(&mut self, qubit: usize, x: bool, z: bool) {
        let bit = 1u64 << qubit;
        self.x = (self.x & !bit) | if x { bit } else { 0 };
        self.z = (self.z & !bit) | if z { bit } else { 0 };
    }

    fn register_mask(&self) -> u64 {
        if self.n as usize == MAX_QUBITS {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        }
    }
}

impl Mul for PauliString {
    type Output = PauliString;

    fn mul(self, rhs: PauliString) -> PauliString {
        assert_eq!(self.n, rhs.n, "qubit count mismatch in Pauli product");
        // Z^b1 X^a2 = (-1)^{b1 a2} X^a2 Z^b1 on each qubit.
        let swaps = (self.z & rhs.x).count_ones();
        PauliString {
            n: self.n,
            x: self.x ^ rhs.x,
            z: self.z ^ rhs.z,
            phase: ((self.phase as u32 + rhs.phase as u32 + 2 * swaps) % 4) as u8,
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match (self.phase as u32 + 4 - (self.x & self.z).count_ones() % 4) % 4 {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(prefix)?;
        for q in 0..self.n as usize {
            write!(f, "{}", self.get(q).symbol())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses strings such as `"+XIZ"`, `"-YY"` or `"ZZI"` (qubit 0 first).
    fn from_str(s: &str) -> Result<Self, Error> {
        let (sign, body) = match s.as_bytes().first() {
            Some(b'+') => (0u32, &s[1..]),
            Some(b'-') => (2u32, &s[1..]),
            _ => (0u32, s),
        };
        let n = body.chars().count();
        if n > MAX_QUBITS {
            return Err(Error::InvalidInput(format!("Pauli string longer than {MAX_QUBITS}")));
        }
        let mut p = PauliString::identity(n);
        for (q, c) in body.chars().enumerate() {
            let pauli = match c {
                'I' | '_' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => return Err(Error::InvalidInput(format!("unexpected Pauli symbol '{other}'"))),
            };
            p = p * PauliString::single(n, q, pauli);
        }
        p.add_phase(sign);
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn y_is_hermitian_with_positive_sign() {
        let y = PauliString::single(1, 0, Pauli::Y);
        assert_eq!(y.sign(), Some(1));
        assert_eq!(format!("{y}"), "+Y");
        // X·Z = -iY
        let xz = PauliString::single(1, 0, Pauli::X) * PauliString::single(1, 0, Pauli::Z);
        assert_eq!(xz.sign(), None);
        assert_eq!(format!("{xz}"), "-iY");
    }

    #[test]
    fn squares_are_plus_identity_for_hermitian_paulis() {
        for p in ["XZ", "YY", "-ZIY", "XYZI"] {
            let p: PauliString = p.parse().unwrap();
            let sq = p * p;
            assert!(sq.is_identity_up_to_phase());
            assert_eq!(sq.sign(), Some(1));
        }
    }

    #[test]
    fn commutation_follows_symplectic_product() {
        let xx: PauliString = "XX".parse().unwrap();
        let zz: PauliString = "ZZ".parse().unwrap();
        let zi: PauliString = "ZI".parse().unwrap();
        assert!(xx.commutes_with(&zz));
        assert!(!xx.commutes_with(&zi));
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["+XIZY", "-ZZ", "+IIII"] {
            let p: PauliString = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
        assert!("XQ".parse::<PauliString>().is_err());
    }
}
