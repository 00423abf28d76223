use rand::Rng;

use super::device::LeakageParams;
use crate::code::{NUM_AUX, NUM_DATA, NUM_QUBITS};

/// Leakage history of one run.
///
/// Leakage is absorbing: a qubit that leaks in cycle `m` stays leaked and is
/// flagged at every later readout. False positives are independent per
/// readout.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeakageTrace {
    /// 1-based cycle in which each qubit (register index) leaked.
    pub leaked_at: [Option<u32>; NUM_QUBITS],
    /// Per cycle, bit `k` set when auxiliary `k` (stabilizer order) was
    /// flagged at its readout.
    pub aux_flags: Vec<u8>,
    /// Bit `j` set when data qubit `j` was flagged at the final readout.
    pub data_flags: u16,
}

impl LeakageTrace {
    pub fn is_leaked(&self, qubit: usize, cycle: u32) -> bool {
        self.leaked_at[qubit].is_some_and(|m| m <= cycle)
    }

    pub fn any_aux_flag(&self) -> bool {
        self.aux_flags.iter().any(|&f| f != 0)
    }

    pub fn any_data_flag(&self) -> bool {
        self.data_flags != 0
    }
}

/// Draws leakage events and flags for `n_cycles` cycles.
pub fn sample_leakage<R: Rng + ?Sized>(params: &LeakageParams, n_cycles: u32, rng: &mut R) -> LeakageTrace {
    let mut leaked_at = [None; NUM_QUBITS];
    let mut aux_flags = Vec::with_capacity(n_cycles as usize);
    let hit = |p: f64, rng: &mut R| p > 0.0 && rng.random::<f64>() < p;
    for m in 1..=n_cycles {
        for (q, slot) in leaked_at.iter_mut().enumerate() {
            let p = if q < NUM_DATA { params.data_leak } else { params.aux_leak };
            if slot.is_none() && hit(p, rng) {
                *slot = Some(m);
            }
        }
        let mut flags = 0u8;
        for k in 0..NUM_AUX {
            let leaked = leaked_at[NUM_DATA + k].is_some();
            if leaked || hit(params.aux_false_positive, rng) {
                flags |= 1 << k;
            }
        }
        aux_flags.push(flags);
    }
    let mut data_flags = 0u16;
    for (j, slot) in leaked_at.iter().enumerate().take(NUM_DATA) {
        if slot.is_some() || hit(params.data_false_positive, rng) {
            data_flags |= 1 << j;
        }
    }
    LeakageTrace { leaked_at, aux_flags, data_flags }
}
