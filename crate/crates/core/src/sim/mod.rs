//! Clifford simulation: Pauli algebra, an exact stabilizer tableau and a
//! Pauli-frame propagator for high-volume noisy sampling.

mod frame;
mod gate;
mod pauli;
mod tableau;

pub use frame::PauliFrame;
pub use gate::Gate;
pub use pauli::{Pauli, PauliString, MAX_QUBITS};
pub use tableau::Tableau;
