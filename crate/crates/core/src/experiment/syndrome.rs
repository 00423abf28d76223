use serde::{Deserialize, Serialize};

use super::ShotRecord;
use crate::code::{Basis, Surface17, NUM_STABILIZERS};

/// Treatment of the first measurement of stabilizers whose value is random
/// for the prepared state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FirstRound {
    /// The first outcome defines the frame; later rounds compare against it.
    #[default]
    Frame,
    /// The first outcome is dropped entirely.
    Discard,
}

/// Detection events of one shot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyndromeRecord {
    pub basis: Basis,
    /// `sigma[m - 1][k]` is 1 when stabilizer `k` changed value in cycle `m`.
    pub sigma: Vec<[u8; NUM_STABILIZERS]>,
    /// Final round for the stabilizers of `basis`, from data parities.
    pub final_sigma: [u8; 4],
}

impl SyndromeRecord {
    pub fn n_cycles(&self) -> usize {
        self.sigma.len()
    }

    /// Detection events of the stabilizers of the decoded basis, round-major:
    /// entry `4 (m - 1) + i` for round `m = 1..=n + 1`.
    pub fn detectors(&self) -> Vec<u8> {
        let range = self.basis.stabilizers();
        let mut out = Vec::with_capacity(4 * (self.sigma.len() + 1));
        for row in &self.sigma {
            out.extend_from_slice(&row[range.clone()]);
        }
        out.extend_from_slice(&self.final_sigma);
        out
    }

    /// Detection events for the stabilizers of `basis` over cycles only.
    pub fn cycle_detectors(&self, basis: Basis) -> Vec<u8> {
        let range = basis.stabilizers();
        self.sigma.iter().flat_map(|row| row[range.clone()].to_vec()).collect()
    }

    pub fn weight(&self) -> usize {
        self.detectors().iter().filter(|&&b| b == 1).count()
    }
}

fn flip(a: i8, b: i8) -> u8 {
    (a != b) as u8
}

/// Detection events `sigma_m = (1 - s_m s_{m-1}) / 2` with the initial value
/// `+1` for stabilizers of the prepared basis. The final round uses
/// stabilizer parities of the data readout.
pub fn compute_syndromes(shot: &ShotRecord, code: &Surface17, first: FirstRound) -> SyndromeRecord {
    let basis = shot.basis();
    let det = basis.stabilizers();
    let n = shot.s.len();
    let mut sigma = Vec::with_capacity(n);
    for m in 0..n {
        let mut row = [0u8; NUM_STABILIZERS];
        for (k, v) in row.iter_mut().enumerate() {
            let prev = if m == 0 { 1 } else { shot.s[m - 1][k] };
            *v = flip(shot.s[m][k], prev);
            if !det.contains(&k) {
                let zeroed = match first {
                    FirstRound::Frame => m == 0,
                    FirstRound::Discard => m <= 1,
                };
                if zeroed {
                    *v = 0;
                }
            }
        }
        sigma.push(row);
    }
    let mut final_sigma = [0u8; 4];
    for (i, k) in det.enumerate() {
        let parity = shot.data_parity(code.stabilizers[k].data_mask());
        let prev = if n == 0 { 1 } else { shot.s[n - 1][k] };
        final_sigma[i] = flip(parity, prev);
    }
    SyndromeRecord { basis, sigma, final_sigma }
}
