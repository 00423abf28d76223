use serde::{Deserialize, Serialize};

use super::memory::{memory_study, DecodeSettings, MemoryStudy};
use crate::code::Surface17;
use crate::error::{Error, Result};
use crate::experiment::InitialState;
use crate::noise::DeviceParams;
use crate::seed::derive_seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    /// Improvement factor.
    pub x: f64,
    /// Mean fitted error per cycle over the simulated states.
    pub epsilon_l: f64,
    pub epsilon_l_se: f64,
    pub study: MemoryStudy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingStudy {
    pub points: Vec<ScalingPoint>,
    /// `ε_L ≈ prefactor · x^exponent`.
    pub prefactor: f64,
    pub exponent: f64,
    pub exponent_se: f64,
}

/// Least-squares line through `(ln x, ln y)`; returns prefactor, exponent
/// and the exponent's standard error.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|p| p.0 > 0.0 && p.1 > 0.0).map(|p| (p.0.ln(), p.1.ln())).collect();
    if pts.len() < 2 {
        return Err(Error::InsufficientData("power-law fit needs two positive points".into()));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("power-law fit needs distinct x".into()));
    }
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx;
    let intercept = my - slope * mx;
    let se = if pts.len() > 2 {
        let rss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
        (rss / (k - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok((intercept.exp(), slope, se))
}

/// Logical error per cycle of the uniform device-average model with every
/// error parameter divided by each factor in `factors`.
#[allow(clippy::too_many_arguments)]
pub fn scaling_study(
    code: &Surface17,
    device: &DeviceParams,
    factors: &[f64],
    states: &[InitialState],
    ns: &[u32],
    shots: u64,
    seed: u64,
    settings: DecodeSettings,
) -> Result<ScalingStudy> {
    if factors.iter().any(|&x| x.is_nan() || x < 1.0) {
        return Err(Error::InvalidInput("improvement factors must be ≥ 1".into()));
    }
    let base = device.uniform_average()?;
    let mut points = Vec::new();
    for &x in factors {
        let dev = base.scaled(x)?;
        let study = memory_study(code, &dev, states, ns, shots, derive_seed(seed, &format!("scaling/{x}")), settings)?;
        let eps: Vec<f64> = study.states.iter().map(|s| s.fit.epsilon_l).collect();
        let se2: f64 = study.states.iter().map(|s| s.fit.epsilon_l_se.powi(2)).sum();
        let k = eps.len() as f64;
        points.push(ScalingPoint { x, epsilon_l: eps.iter().sum::<f64>() / k, epsilon_l_se: se2.sqrt() / k, study });
    }
    let (prefactor, exponent, exponent_se) = fit_power_law(&points.iter().map(|p| (p.x, p.epsilon_l)).collect::<Vec<_>>())?;
    Ok(ScalingStudy { points, prefactor, exponent, exponent_se })
}
