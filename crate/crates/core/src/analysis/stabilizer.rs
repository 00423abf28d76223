use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::code::{Surface17, NUM_STABILIZERS};
use crate::error::{Error, Result};
use crate::experiment::{shot_seed, Program};
use crate::noise::DeviceParams;
use crate::seed::derive_seed;

/// `ε = (1/2^N) Σ_n |s̄_n - s̄_ideal,n| / 2` over the `2^N` basis inputs.
pub fn stabilizer_error(measured: &[f64], ideal: &[f64]) -> Result<f64> {
    if measured.len() != ideal.len() {
        return Err(Error::SizeMismatch { expected: ideal.len(), got: measured.len() });
    }
    if measured.len() != 4 && measured.len() != 16 {
        return Err(Error::InvalidInput(format!("expected 4 or 16 input states, got {}", measured.len())));
    }
    let k = measured.len() as f64;
    Ok(measured.iter().zip(ideal).map(|(m, i)| (m - i).abs() / 2.0).sum::<f64>() / k)
}

/// Mean stabilizer values of one plaquette over all its basis inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilizerReport {
    pub stabilizer: String,
    pub weight: usize,
    /// `s̄` per input state, indexed by the input bit string.
    pub means: Vec<f64>,
    pub ideal: Vec<f64>,
    pub epsilon: f64,
}

/// Runs the isolated measurement of `stabilizer` `shots` times per input.
pub fn stabilizer_harness(
    code: &Surface17,
    device: &DeviceParams,
    stabilizer: usize,
    shots: u64,
    seed: u64,
) -> Result<StabilizerReport> {
    if shots == 0 {
        return Err(Error::InvalidInput("shots must be at least 1".into()));
    }
    let spec = code.stabilizers.get(stabilizer).ok_or_else(|| Error::InvalidInput(format!("no stabilizer {stabilizer}")))?;
    let weight = spec.support.len();
    let mut means = Vec::with_capacity(1 << weight);
    let mut ideal = Vec::with_capacity(1 << weight);
    for input in 0..1u32 << weight {
        let noisy = Program::compile_stabilizer(code, device, stabilizer, input, true)?;
        let exact = Program::compile_stabilizer(code, device, stabilizer, input, false)?;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        ideal.push(if exact.sample(&mut rng, None).0[0] { -1.0 } else { 1.0 });
        let stream = derive_seed(seed, &format!("stabilizer/{stabilizer}/{input}"));
        let sum: i64 = (0..shots)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(shot_seed(stream, i));
                if noisy.sample(&mut rng, None).0[0] {
                    -1
                } else {
                    1
                }
            })
            .sum();
        means.push(sum as f64 / shots as f64);
    }
    let epsilon = stabilizer_error(&means, &ideal)?;
    Ok(StabilizerReport { stabilizer: spec.auxiliary.to_string(), weight, means, ideal, epsilon })
}

/// [`stabilizer_harness`] for all eight stabilizers.
pub fn stabilizer_harness_all(code: &Surface17, device: &DeviceParams, shots: u64, seed: u64) -> Result<Vec<StabilizerReport>> {
    (0..NUM_STABILIZERS).map(|k| stabilizer_harness(code, device, k, shots, seed)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_limits() {
        let ideal = [1.0, -1.0, -1.0, 1.0];
        assert_eq!(stabilizer_error(&ideal, &ideal).unwrap(), 0.0);
        assert_eq!(stabilizer_error(&[0.0; 4], &ideal).unwrap(), 0.5);
        assert!(stabilizer_error(&[0.0; 3], &[0.0; 3]).is_err());
    }
}
