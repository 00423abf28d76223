//! Repeated stabilizer measurement of a prepared logical state.
//!
//! An experiment is compiled once into a [`Program`] (an absolute-time gate
//! and noise timeline), executed noiselessly on a tableau to obtain reference
//! outcomes, and then sampled shot by shot as a Pauli frame.

mod program;
mod record;
mod rejection;
mod syndrome;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::code::{Basis, Surface17};
use crate::error::{Error, Result};
use crate::noise::DeviceParams;

pub use program::{aux_record, data_record, herald_record, Fault, MeasureKind, Program};
pub use record::{read_jsonl, write_jsonl, ShotRecord, SCHEMA_VERSION};
pub use rejection::{fit_retention, reject_leakage, RejectionMode, RejectionSummary, RetentionFit};
pub use syndrome::{compute_syndromes, FirstRound, SyndromeRecord};

/// Logical input state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InitialState {
    #[serde(rename = "0L")]
    Zero,
    #[serde(rename = "1L")]
    One,
    #[serde(rename = "+L")]
    Plus,
    #[serde(rename = "-L")]
    Minus,
}

impl InitialState {
    pub const ALL: [InitialState; 4] = [Self::Zero, Self::One, Self::Plus, Self::Minus];

    /// Basis whose logical operator the state is an eigenstate of.
    pub fn basis(self) -> Basis {
        match self {
            Self::Zero | Self::One => Basis::Z,
            Self::Plus | Self::Minus => Basis::X,
        }
    }

    /// Eigenvalue of the logical operator in [`Self::basis`].
    pub fn ideal_sign(self) -> i8 {
        match self {
            Self::Zero | Self::Plus => 1,
            Self::One | Self::Minus => -1,
        }
    }
}

impl fmt::Display for InitialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Zero => "0L",
            Self::One => "1L",
            Self::Plus => "+L",
            Self::Minus => "-L",
        })
    }
}

impl FromStr for InitialState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "0L" | "0" => Ok(Self::Zero),
            "1L" | "1" => Ok(Self::One),
            "+L" | "+" => Ok(Self::Plus),
            "-L" | "-" => Ok(Self::Minus),
            _ => Err(Error::InvalidInput(format!("unknown initial state '{s}'"))),
        }
    }
}

/// Parameters of one batch of shots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub initial_state: InitialState,
    pub n_cycles: u32,
    pub shots: u64,
    pub seed: u64,
    #[serde(default)]
    pub rejection: RejectionMode,
    #[serde(default)]
    pub first_round: FirstRound,
}

impl RunConfig {
    pub fn new(initial_state: InitialState, n_cycles: u32, shots: u64, seed: u64) -> Self {
        Self { initial_state, n_cycles, shots, seed, rejection: RejectionMode::default(), first_round: FirstRound::default() }
    }

    fn check(&self) -> Result<()> {
        if self.n_cycles == 0 {
            return Err(Error::InvalidInput("n_cycles must be at least 1".into()));
        }
        if self.shots == 0 {
            return Err(Error::InvalidInput("shots must be at least 1".into()));
        }
        Ok(())
    }
}

/// Seed of shot `index` within a batch seeded with `seed`.
pub fn shot_seed(seed: u64, index: u64) -> u64 {
    seed ^ index
}

/// Samples shots `range` of an already compiled program, in index order.
pub fn sample_shots(program: &Program, seed: u64, range: std::ops::Range<u64>) -> Vec<ShotRecord> {
    range
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(shot_seed(seed, i));
            let (raw, leak) = program.sample(&mut rng, None);
            ShotRecord::from_raw(program, i, &raw, &leak)
        })
        .collect()
}

/// Runs `config.shots` shots on `device`. The output is independent of the
/// number of worker threads.
pub fn run_memory_experiment(code: &Surface17, device: &DeviceParams, config: &RunConfig) -> Result<Vec<ShotRecord>> {
    config.check()?;
    let program = Program::compile(code, device, config.initial_state, config.n_cycles, true)?;
    Ok(sample_shots(&program, config.seed, 0..config.shots))
}

/// One noiseless shot with a single injected fault.
pub fn run_with_fault(program: &Program, fault: Fault, seed: u64) -> ShotRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (raw, leak) = program.sample(&mut rng, Some(fault));
    ShotRecord::from_raw(program, 0, &raw, &leak)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{build_surface17, NUM_QUBITS};
    use crate::sim::Pauli;

    fn noiseless_program(state: InitialState, n: u32) -> Program {
        let code = build_surface17();
        let dev = DeviceParams::paper().noiseless();
        Program::compile(&code, &dev, state, n, false).unwrap()
    }

    #[test]
    fn noiseless_runs_are_ideal() {
        for state in InitialState::ALL {
            let p = noiseless_program(state, 4);
            for seed in 0..20 {
                let shot = run_with_fault(&p, Fault::MeasurementFlip { record: usize::MAX }, seed);
                assert!(shot.herald_ok);
                let syn = compute_syndromes(&shot, &build_surface17(), FirstRound::Frame);
                assert!(syn.sigma.iter().all(|r| r.iter().all(|&b| b == 0)), "{state} {seed}");
                assert!(syn.final_sigma.iter().all(|&b| b == 0));
                assert_eq!(shot.logical_parity(&build_surface17()), state.ideal_sign());
            }
        }
    }

    #[test]
    fn frame_sampler_matches_tableau_for_single_faults() {
        let code = build_surface17();
        let none = crate::noise::LeakageTrace { leaked_at: [None; NUM_QUBITS], aux_flags: vec![0; 2], data_flags: 0 };
        for state in [InitialState::Zero, InitialState::Minus] {
            let p = noiseless_program(state, 2);
            for k in (0..p.num_ops()).step_by(5) {
                for q in [0usize, 4, 7, 9, 12, 15] {
                    for pauli in Pauli::NON_IDENTITY {
                        let fault = Fault::Pauli { after_op: k, qubit: q, pauli };
                        let frame = run_with_fault(&p, fault, k as u64);
                        let raw = p.run_tableau(q as u64, Some(fault)).unwrap();
                        let exact = ShotRecord::from_raw(&p, 0, &raw, &none);
                        let a = compute_syndromes(&frame, &code, FirstRound::Frame);
                        let b = compute_syndromes(&exact, &code, FirstRound::Frame);
                        assert_eq!(a, b, "{state} op {k} q {q} {pauli:?}");
                        assert_eq!(frame.logical_parity(&code), exact.logical_parity(&code));
                    }
                }
            }
            assert_eq!(p.num_measurements(), NUM_QUBITS + 16 + 9);
        }
    }

    #[test]
    fn batches_are_reproducible() {
        let code = build_surface17();
        let dev = DeviceParams::paper();
        let cfg = RunConfig::new(InitialState::Zero, 3, 50, 42);
        let a = run_memory_experiment(&code, &dev, &cfg).unwrap();
        let b = run_memory_experiment(&code, &dev, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(run_memory_experiment(&code, &dev, &RunConfig::new(InitialState::Zero, 0, 5, 1)).is_err());
    }
}
