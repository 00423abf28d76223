use rand::Rng;

use super::gate::Gate;
use super::pauli::{Pauli, PauliString, MAX_QUBITS};

/// Pauli error frame tracked relative to a noiseless reference execution.
///
/// Signs are irrelevant for frames, so only the X and Z masks are stored.
/// A Z-basis measurement reports a flip exactly when the frame has an X or Y
/// component on the measured qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PauliFrame {
    n: usize,
    x: u64,
    z: u64,
}

impl PauliFrame {
    pub fn new(n: usize) -> Self {
        assert!(n <= MAX_QUBITS, "at most {MAX_QUBITS} qubits are supported");
        Self { n, x: 0, z: 0 }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn as_pauli_string(&self) -> PauliString {
        PauliString::from_masks(self.n, self.x, self.z)
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    /// Multiplies a single-qubit error into the frame.
    #[inline]
    pub fn inject(&mut self, q: usize, p: Pauli) {
        let (x, z) = p.bits();
        self.x ^= (x as u64) << q;
        self.z ^= (z as u64) << q;
    }

    #[inline]
    pub fn inject_masks(&mut self, x: u64, z: u64) {
        self.x ^= x;
        self.z ^= z;
    }

    pub fn inject_string(&mut self, p: &PauliString) {
        debug_assert_eq!(p.num_qubits(), self.n);
        self.inject_masks(p.x_mask(), p.z_mask());
    }

    /// Propagates the frame through a Clifford gate.
    #[inline]
    pub fn apply(&mut self, gate: Gate, targets: &[usize]) {
        let a = targets[0];
        match gate {
            Gate::H | Gate::SqrtY | Gate::SqrtYdg => {
                let d = (self.x ^ self.z) >> a & 1;
                self.x ^= d << a;
                self.z ^= d << a;
            }
            Gate::S | Gate::Sdg => self.z ^= self.x & (1 << a),
            Gate::X | Gate::Y | Gate::Z => {}
            Gate::Cz => {
                let b = targets[1];
                let xa = self.x >> a & 1;
                let xb = self.x >> b & 1;
                self.z ^= (xb << a) | (xa << b);
            }
            Gate::Cx => {
                let b = targets[1];
                self.x ^= (self.x >> a & 1) << b;
                self.z ^= (self.z >> b & 1) << a;
            }
        }
    }

    /// Outcome flip of a Z-basis measurement of `q`.
    #[inline]
    pub fn measure_flip(&self, q: usize) -> bool {
        self.x >> q & 1 == 1
    }

    /// After a Z measurement the Z component on `q` is a gauge; re-drawing it
    /// keeps later outcomes that depend on it correctly random.
    #[inline]
    pub fn randomize_z<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) {
        let bit = rng.random::<bool>() as u64;
        self.z = (self.z & !(1 << q)) | (bit << q);
    }

    /// Draws every Z bit at random, the gauge freedom of `|0…0⟩`.
    pub fn randomize_all_z<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let mask = if self.n == MAX_QUBITS { u64::MAX } else { (1u64 << self.n) - 1 };
        self.z = rng.random::<u64>() & mask;
    }
}
