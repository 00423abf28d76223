use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::decay::{logical_decay_fit, logical_error_probability, DecayFit, DecayPoint};
use crate::code::{Basis, Surface17, NUM_STABILIZERS};
use crate::decoder::{
    correct_logical, estimate_edge_probabilities, mwpm_decode, Decoder, DetectionGraph, EdgeProbabilities, DEFAULT_PATH_CAP,
};
use crate::error::{Error, Result};
use crate::experiment::{
    compute_syndromes, fit_retention, reject_leakage, run_memory_experiment, FirstRound, InitialState, RejectionMode,
    RetentionFit, RunConfig, ShotRecord,
};
use crate::noise::DeviceParams;
use crate::seed::derive_seed;

/// How shots are filtered and decoded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeSettings {
    pub rejection: RejectionMode,
    pub first_round: FirstRound,
    pub cap: usize,
}

impl Default for DecodeSettings {
    fn default() -> Self {
        Self { rejection: RejectionMode::Both, first_round: FirstRound::Frame, cap: DEFAULT_PATH_CAP }
    }
}

/// Edge probabilities learned from the detection events of `shots`.
pub fn learn_weights(
    code: &Surface17,
    shots: &[ShotRecord],
    basis: Basis,
    n_cycles: usize,
    first: FirstRound,
) -> Result<(DetectionGraph, EdgeProbabilities)> {
    if let Some(bad) = shots.iter().find(|s| s.basis() != basis || s.n_cycles() != n_cycles) {
        return Err(Error::InvalidInput(format!(
            "shot {} has basis {} and {} cycles, expected {basis} and {n_cycles}",
            bad.shot,
            bad.basis(),
            bad.n_cycles()
        )));
    }
    let graph = DetectionGraph::new(code, basis, n_cycles)?;
    let det: Vec<Vec<u8>> = shots.par_iter().map(|s| compute_syndromes(s, code, first).detectors()).collect();
    let probs = estimate_edge_probabilities(&graph, &det)?;
    Ok((graph, probs))
}

/// Decoder for `state` and `n_cycles` trained on its own simulated batch.
pub fn train_decoder(
    code: &Surface17,
    device: &DeviceParams,
    state: InitialState,
    n_cycles: u32,
    shots: u64,
    seed: u64,
    settings: DecodeSettings,
) -> Result<Decoder> {
    let batch = run_memory_experiment(code, device, &RunConfig::new(state, n_cycles, shots, seed))?;
    let (kept, _) = reject_leakage(&batch, settings.rejection);
    let (graph, probs) = learn_weights(code, &kept, state.basis(), n_cycles as usize, settings.first_round)?;
    Decoder::new(graph, &probs, settings.cap)
}

/// Corrected logical readout of every shot.
pub fn decode_shots(code: &Surface17, decoder: &Decoder, shots: &[ShotRecord], first: FirstRound) -> Result<Vec<i8>> {
    let basis = decoder.graph().basis;
    shots
        .par_iter()
        .map(|s| {
            let syn = compute_syndromes(s, code, first);
            let m = mwpm_decode(decoder, &syn)?;
            correct_logical(code, s, &m, basis)
        })
        .collect()
}

/// Average syndrome element over all stabilizers and cycles `m ≥ 2`; for a
/// single cycle only the stabilizers of the prepared basis are used.
pub fn mean_syndrome_element(code: &Surface17, shots: &[ShotRecord], first: FirstRound) -> f64 {
    let (sum, count) = shots
        .par_iter()
        .map(|s| {
            let syn = compute_syndromes(s, code, first);
            if syn.sigma.len() >= 2 {
                let sum: usize = syn.sigma[1..].iter().flatten().map(|&b| b as usize).sum();
                (sum, (syn.sigma.len() - 1) * NUM_STABILIZERS)
            } else {
                let d = syn.cycle_detectors(s.basis());
                (d.iter().map(|&b| b as usize).sum(), d.len())
            }
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    if count == 0 {
        0.0
    } else {
        sum as f64 / count as f64
    }
}

/// Decoded result for one initial state and cycle count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemoryPoint {
    pub state: InitialState,
    pub n: u32,
    pub shots: usize,
    pub heralded: usize,
    pub retained: usize,
    /// Retained fraction of heralded shots.
    pub retained_fraction: f64,
    /// Mean corrected logical readout, `<O_L>`.
    pub expectation: f64,
    pub expectation_se: f64,
    /// Mean readout without correction.
    pub raw_expectation: f64,
    /// `(1 - |<O_L>|) / 2`.
    pub logical_error: f64,
    pub mean_syndrome: f64,
}

/// Filters and decodes one batch of shots of a single state and cycle count.
pub fn decode_point(code: &Surface17, decoder: &Decoder, batch: &[ShotRecord], settings: DecodeSettings) -> Result<MemoryPoint> {
    let first = batch.first().ok_or_else(|| Error::InsufficientData("empty batch".into()))?;
    let (state, n) = (first.initial_state, first.n_cycles());
    if let Some(bad) = batch.iter().find(|s| s.initial_state != state || s.n_cycles() != n) {
        return Err(Error::InvalidInput(format!("shot {} does not match state {state} with {n} cycles", bad.shot)));
    }
    let (kept, summary) = reject_leakage(batch, settings.rejection);
    if kept.is_empty() {
        return Err(Error::InsufficientData(format!("no shots retained for {state}, n = {n}")));
    }
    let values = decode_shots(code, decoder, &kept, settings.first_round)?;
    let k = values.len() as f64;
    let mean = values.iter().map(|&v| v as f64).sum::<f64>() / k;
    let var = (1.0 - mean * mean).max(0.0);
    let raw = kept.iter().map(|s| s.logical_parity(code) as f64).sum::<f64>() / k;
    Ok(MemoryPoint {
        state,
        n: n as u32,
        shots: summary.total,
        heralded: summary.heralded,
        retained: summary.retained,
        retained_fraction: summary.fraction,
        expectation: mean,
        expectation_se: (var / k).sqrt(),
        raw_expectation: raw,
        logical_error: logical_error_probability(mean),
        mean_syndrome: mean_syndrome_element(code, &kept, settings.first_round),
    })
}

/// Simulates, trains a decoder on an independent batch and decodes one point.
/// The training and test batches draw from sub-seeds of `seed`.
pub fn memory_point(
    code: &Surface17,
    device: &DeviceParams,
    state: InitialState,
    n: u32,
    shots: u64,
    seed: u64,
    settings: DecodeSettings,
) -> Result<MemoryPoint> {
    let decoder = train_decoder(code, device, state, n, shots, derive_seed(seed, &format!("train/{state}/{n}")), settings)?;
    let batch =
        run_memory_experiment(code, device, &RunConfig::new(state, n, shots, derive_seed(seed, &format!("test/{state}/{n}"))))?;
    decode_point(code, &decoder, &batch, settings)
}

/// Decay fit and retention fit of one initial state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateSummary {
    pub state: InitialState,
    pub fit: DecayFit,
    pub retention: Option<RetentionFit>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemoryStudy {
    pub points: Vec<MemoryPoint>,
    pub states: Vec<StateSummary>,
}

/// Fits the points of each state: `<O_L>` aligned with the ideal sign, and
/// the retained fraction `r(n)`.
pub fn summarize(points: &[MemoryPoint], t_c_us: f64) -> Result<Vec<StateSummary>> {
    let mut states: Vec<InitialState> = Vec::new();
    for p in points {
        if !states.contains(&p.state) {
            states.push(p.state);
        }
    }
    states
        .into_iter()
        .map(|state| {
            let pts: Vec<&MemoryPoint> = points.iter().filter(|p| p.state == state).collect();
            let decay: Vec<DecayPoint> = pts
                .iter()
                .map(|p| DecayPoint { n: p.n, value: p.expectation * state.ideal_sign() as f64, se: p.expectation_se })
                .collect();
            let fit = logical_decay_fit(&decay, t_c_us)?;
            let retention = fit_retention(&pts.iter().map(|p| (p.n, p.retained_fraction)).collect::<Vec<_>>()).ok();
            Ok(StateSummary { state, fit, retention })
        })
        .collect()
}

/// Runs [`memory_point`] for every state and cycle count and fits each state.
pub fn memory_study(
    code: &Surface17,
    device: &DeviceParams,
    states: &[InitialState],
    ns: &[u32],
    shots: u64,
    seed: u64,
    settings: DecodeSettings,
) -> Result<MemoryStudy> {
    let mut points = Vec::new();
    for &state in states {
        for &n in ns {
            points.push(memory_point(code, device, state, n, shots, seed, settings)?);
        }
    }
    let states = summarize(&points, device.timing.cycle_us())?;
    Ok(MemoryStudy { points, states })
}
