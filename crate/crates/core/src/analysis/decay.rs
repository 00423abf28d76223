use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Logical expectation value after `n` cycles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayPoint {
    pub n: u32,
    pub value: f64,
    /// Standard error of `value`; zero means unweighted.
    pub se: f64,
}

/// Fit of `<O_L>(n) = A exp(-n t_c / T)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub amplitude: f64,
    pub amplitude_se: f64,
    /// Logical lifetime in µs.
    pub t_us: f64,
    pub t_se_us: f64,
    pub t_c_us: f64,
    pub epsilon_l: f64,
    pub epsilon_l_se: f64,
    pub points: Vec<DecayPoint>,
    /// `value - model` per point.
    pub residuals: Vec<f64>,
}

/// Error per cycle `[1 - exp(-t_c / T)] / 2` for lifetime `t_us`.
pub fn epsilon_from_lifetime(t_c_us: f64, t_us: f64) -> f64 {
    if t_us.is_infinite() {
        return 0.0;
    }
    -(-t_c_us / t_us).exp_m1() / 2.0
}

/// Logical error probability `(1 - |<O_L>|) / 2`.
pub fn logical_error_probability(expectation: f64) -> f64 {
    (1.0 - expectation.abs()) / 2.0
}

/// Error per cycle from the ratio of the first and last points, without a
/// fit: `<O>(n) ∝ (1 - 2 ε)^n`.
pub fn epsilon_direct(points: &[DecayPoint]) -> Result<f64> {
    let mut pts = points.to_vec();
    pts.sort_by_key(|p| p.n);
    let (a, b) = match (pts.first(), pts.last()) {
        (Some(a), Some(b)) if b.n > a.n && a.value > 0.0 && b.value > 0.0 => (a, b),
        _ => return Err(Error::InsufficientData("need two positive points at distinct n".into())),
    };
    let ratio = (b.value / a.value).powf(1.0 / (b.n - a.n) as f64);
    Ok((1.0 - ratio) / 2.0)
}

/// Weighted Levenberg–Marquardt fit with free amplitude and no offset.
pub fn logical_decay_fit(points: &[DecayPoint], t_c_us: f64) -> Result<DecayFit> {
    let mut ns: Vec<u32> = points.iter().map(|p| p.n).collect();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 3 {
        return Err(Error::InsufficientData("decay fit needs at least three distinct n".into()));
    }
    if t_c_us.is_nan() || t_c_us <= 0.0 {
        return Err(Error::InvalidInput("cycle time must be positive".into()));
    }
    let weighted = points.iter().all(|p| p.se > 0.0);
    let w: Vec<f64> = points.iter().map(|p| if weighted { p.se.powi(-2) } else { 1.0 }).collect();

    // Start from a log-linear fit of the positive points.
    let pos: Vec<(f64, f64)> = points.iter().filter(|p| p.value > 0.0).map(|p| (p.n as f64, p.value.ln())).collect();
    let mut theta = if pos.len() >= 2 {
        let k = pos.len() as f64;
        let mx = pos.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pos.iter().map(|p| p.1).sum::<f64>() / k;
        let sxx: f64 = pos.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let slope = if sxx > 0.0 { pos.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx } else { 0.0 };
        Vector2::new((my - slope * mx).exp(), (-slope).max(1e-6))
    } else {
        Vector2::new(1.0, 0.05)
    };

    let chi2 = |t: &Vector2<f64>| -> f64 {
        points.iter().zip(&w).map(|(p, wi)| wi * (p.value - t[0] * (-t[1] * p.n as f64).exp()).powi(2)).sum()
    };
    let normal = |t: &Vector2<f64>| -> (Matrix2<f64>, Vector2<f64>) {
        let mut jtj = Matrix2::zeros();
        let mut jtr = Vector2::zeros();
        for (p, wi) in points.iter().zip(&w) {
            let n = p.n as f64;
            let e = (-t[1] * n).exp();
            let r = p.value - t[0] * e;
            let j = Vector2::new(e, -t[0] * n * e);
            jtj += *wi * j * j.transpose();
            jtr += *wi * r * j;
        }
        (jtj, jtr)
    };

    let mut lambda = 1e-3;
    let mut current = chi2(&theta);
    let mut converged = false;
    for _ in 0..500 {
        let (jtj, jtr) = normal(&theta);
        let damped = jtj + lambda * Matrix2::from_diagonal(&jtj.diagonal());
        let Some(step) = damped.lu().solve(&jtr) else {
            lambda *= 10.0;
            continue;
        };
        let trial = theta + step;
        let c = chi2(&trial);
        if c <= current {
            let done = (current - c) <= 1e-14 * current.max(1e-300) || step.norm() <= 1e-12 * theta.norm();
            theta = trial;
            current = c;
            lambda = (lambda / 10.0).max(1e-12);
            if done {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                converged = true;
                break;
            }
        }
    }
    if !converged || !theta.iter().all(|v| v.is_finite()) {
        return Err(Error::Fit("decay fit did not converge".into()));
    }
    let a = theta[0];
    let k = if theta[1] < 0.0 && theta[1] > -1e-9 { 0.0 } else { theta[1] };
    if k < 0.0 {
        return Err(Error::Fit(format!("fitted decay rate {k:.3e} per cycle is negative")));
    }

    let (jtj, _) = normal(&theta);
    let dof = points.len().saturating_sub(2).max(1) as f64;
    let scale = if weighted { 1.0 } else { current / dof };
    let cov = jtj.try_inverse().map(|c| c * scale).unwrap_or_else(|| Matrix2::from_element(f64::NAN));
    let k_se = cov[(1, 1)].max(0.0).sqrt();
    let t_us = if k > 0.0 { t_c_us / k } else { f64::INFINITY };
    let epsilon_l = epsilon_from_lifetime(t_c_us, t_us);
    Ok(DecayFit {
        amplitude: a,
        amplitude_se: cov[(0, 0)].max(0.0).sqrt(),
        t_us,
        t_se_us: if k > 0.0 { t_us * k_se / k } else { f64::INFINITY },
        t_c_us,
        epsilon_l,
        epsilon_l_se: 0.5 * (-k).exp() * k_se,
        points: points.to_vec(),
        residuals: points.iter().map(|p| p.value - a * (-k * p.n as f64).exp()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn published_lifetimes_give_published_errors() {
        assert!((epsilon_from_lifetime(1.1, 16.4) - 0.0324).abs() < 5e-4);
        assert!((epsilon_from_lifetime(1.1, 18.2) - 0.029).abs() < 1e-3);
        assert_eq!(epsilon_from_lifetime(1.1, f64::INFINITY), 0.0);
    }

    #[test]
    fn noisy_synthetic_decay_is_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let points: Vec<DecayPoint> = [1, 2, 4, 8, 16]
            .iter()
            .map(|&n| {
                let v = 0.97 * (-(n as f64) * 1.1 / 20.0).exp();
                DecayPoint { n, value: v * (1.0 + 0.01 * (rng.random::<f64>() * 2.0 - 1.0)), se: 0.01 * v }
            })
            .collect();
        let fit = logical_decay_fit(&points, 1.1).unwrap();
        assert!((fit.t_us - 20.0).abs() < 1.0, "{}", fit.t_us);
        assert!((fit.amplitude - 0.97).abs() < 0.02);
        let direct = epsilon_direct(&points).unwrap();
        assert!((direct - fit.epsilon_l).abs() < 3e-3);
    }

    #[test]
    fn flat_data_has_infinite_lifetime() {
        let points: Vec<DecayPoint> = [1, 2, 4].iter().map(|&n| DecayPoint { n, value: 1.0, se: 0.0 }).collect();
        let fit = logical_decay_fit(&points, 1.1).unwrap();
        assert!(fit.epsilon_l.abs() < 1e-9);
        assert!(logical_decay_fit(&points[..2], 1.1).is_err());
    }
}
