use nalgebra::{Matrix2, Vector2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One integrated readout shot.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IqShot {
    pub u: [f64; 2],
    /// Prepared transmon level, 0, 1 or 2.
    pub label: u8,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IqBatch {
    pub shots: Vec<IqShot>,
}

impl IqBatch {
    pub fn labels(&self) -> Vec<u8> {
        self.shots.iter().map(|s| s.label).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub mean: [f64; 2],
    /// Row-major 2×2 covariance.
    pub cov: [[f64; 2]; 2],
    pub weight: f64,
}

impl GaussianComponent {
    pub fn isotropic(mean: [f64; 2], sigma: f64, weight: f64) -> Self {
        Self { mean, cov: [[sigma * sigma, 0.0], [0.0, sigma * sigma]], weight }
    }

    fn mean_v(&self) -> Vector2<f64> {
        Vector2::new(self.mean[0], self.mean[1])
    }

    fn cov_m(&self) -> Matrix2<f64> {
        Matrix2::new(self.cov[0][0], self.cov[0][1], self.cov[1][0], self.cov[1][1])
    }

    /// Log density at `u`; `None` when the covariance is not positive definite.
    fn log_density(&self, u: &[f64; 2]) -> Option<f64> {
        let cov = self.cov_m();
        let chol = cov.cholesky()?;
        let d = Vector2::new(u[0], u[1]) - self.mean_v();
        let maha = d.dot(&chol.solve(&d));
        let l = chol.l();
        let log_det = 2.0 * (l[(0, 0)].ln() + l[(1, 1)].ln());
        Some(-0.5 * maha - 0.5 * log_det - (2.0 * std::f64::consts::PI).ln())
    }
}

/// Three-component Gaussian mixture over the IQ plane; component `i`
/// describes level `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixture3 {
    pub components: [GaussianComponent; 3],
}

impl GaussianMixture3 {
    /// Most likely component among the first `levels`, weighted by the
    /// fitted priors unless `equal_priors`.
    pub fn assign(&self, u: &[f64; 2], levels: usize, equal_priors: bool) -> u8 {
        let mut best = (0u8, f64::NEG_INFINITY);
        for (i, c) in self.components.iter().take(levels).enumerate() {
            let prior = if equal_priors { 0.0 } else { c.weight.ln() };
            let v = c.log_density(u).unwrap_or(f64::NEG_INFINITY) + prior;
            if v > best.1 {
                best = (i as u8, v);
            }
        }
        best.0
    }

    pub fn assign_batch(&self, batch: &IqBatch, levels: usize, equal_priors: bool) -> Vec<u8> {
        batch.shots.par_iter().map(|s| self.assign(&s.u, levels, equal_priors)).collect()
    }

    fn log_likelihood(&self, shots: &[IqShot]) -> Result<f64> {
        shots
            .par_iter()
            .map(|s| {
                let terms: Option<Vec<f64>> =
                    self.components.iter().map(|c| c.log_density(&s.u).map(|l| l + c.weight.ln())).collect();
                terms.map(|t| log_sum_exp(&t)).ok_or_else(|| Error::Degenerate("covariance is not positive definite".into()))
            })
            .sum()
    }
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Draws `per_level` labelled shots from each component of `model`.
pub fn synthesize_iq(model: &GaussianMixture3, per_level: usize, seed: u64) -> Result<IqBatch> {
    let chols: Vec<Matrix2<f64>> = model
        .components
        .iter()
        .map(|c| c.cov_m().cholesky().map(|ch| ch.l()))
        .collect::<Option<_>>()
        .ok_or_else(|| Error::Degenerate("planted covariance is not positive definite".into()))?;
    let shots = (0..3 * per_level)
        .into_par_iter()
        .map(|i| {
            let label = i / per_level;
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ i as u64);
            let z = Vector2::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
            let u = model.components[label].mean_v() + chols[label] * z;
            IqShot { u: [u[0], u[1]], label: label as u8 }
        })
        .collect();
    Ok(IqBatch { shots })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GmmOptions {
    pub max_iter: usize,
    /// Convergence threshold on the per-shot log-likelihood change.
    pub tol: f64,
    /// Minimal Mahalanobis separation between labelled means.
    pub min_separation: f64,
}

impl Default for GmmOptions {
    fn default() -> Self {
        Self { max_iter: 500, tol: 1e-10, min_separation: 0.1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GmmFit {
    pub model: GaussianMixture3,
    /// Total log-likelihood after initialisation and after each iteration.
    pub log_likelihood: Vec<f64>,
    pub iterations: usize,
}

fn labelled_moments(shots: &[&IqShot]) -> GaussianComponent {
    let n = shots.len() as f64;
    let mut mean = Vector2::zeros();
    for s in shots {
        mean += Vector2::new(s.u[0], s.u[1]);
    }
    mean /= n;
    let mut cov = Matrix2::zeros();
    for s in shots {
        let d = Vector2::new(s.u[0], s.u[1]) - mean;
        cov += d * d.transpose();
    }
    cov /= n;
    GaussianComponent {
        mean: [mean[0], mean[1]],
        cov: [[cov[(0, 0)], cov[(0, 1)]], [cov[(1, 0)], cov[(1, 1)]]],
        weight: 1.0 / 3.0,
    }
}

/// Expectation maximisation for a three-level mixture, initialised from the
/// labelled per-level moments. The log-likelihood is checked to be
/// non-decreasing at every step.
pub fn fit_gmm3(batch: &IqBatch, opts: &GmmOptions) -> Result<GmmFit> {
    let shots = &batch.shots;
    if shots.iter().any(|s| !s.u.iter().all(|x| x.is_finite())) {
        return Err(Error::InvalidInput("non-finite IQ value".into()));
    }
    let mut init = Vec::with_capacity(3);
    for level in 0..3u8 {
        let group: Vec<&IqShot> = shots.iter().filter(|s| s.label == level).collect();
        if group.len() < 3 {
            return Err(Error::InsufficientData(format!("level {level} has {} shots", group.len())));
        }
        init.push(labelled_moments(&group));
    }
    for a in 0..3 {
        for b in a + 1..3 {
            let pooled = (init[a].cov_m() + init[b].cov_m()) / 2.0;
            let d = init[a].mean_v() - init[b].mean_v();
            let sep = pooled
                .cholesky()
                .map(|c| d.dot(&c.solve(&d)).sqrt())
                .ok_or_else(|| Error::Degenerate(format!("level {a} or {b} has a singular covariance")))?;
            if sep < opts.min_separation {
                return Err(Error::Degenerate(format!("levels {a} and {b} are not separated (distance {sep:.3e})")));
            }
        }
    }
    let mut model = GaussianMixture3 { components: [init[0], init[1], init[2]] };
    let n = shots.len() as f64;
    let mut ll = vec![model.log_likelihood(shots)?];
    for it in 1..=opts.max_iter {
        // E step: responsibilities; M step: weighted moments.
        let stats = shots
            .par_iter()
            .map(|s| {
                let logs: Vec<f64> =
                    model.components.iter().map(|c| c.log_density(&s.u).unwrap_or(f64::NEG_INFINITY) + c.weight.ln()).collect();
                let norm = log_sum_exp(&logs);
                let u = Vector2::new(s.u[0], s.u[1]);
                let mut acc = [(0.0, Vector2::zeros(), Matrix2::zeros()); 3];
                for k in 0..3 {
                    let r = (logs[k] - norm).exp();
                    acc[k] = (r, u * r, u * u.transpose() * r);
                }
                acc
            })
            .reduce(
                || [(0.0, Vector2::zeros(), Matrix2::zeros()); 3],
                |mut a, b| {
                    for k in 0..3 {
                        a[k].0 += b[k].0;
                        a[k].1 += b[k].1;
                        a[k].2 += b[k].2;
                    }
                    a
                },
            );
        for (k, (r, s1, s2)) in stats.iter().enumerate() {
            if *r <= 0.0 {
                return Err(Error::Degenerate(format!("component {k} lost all support")));
            }
            let mean = s1 / *r;
            let cov = s2 / *r - mean * mean.transpose();
            model.components[k] = GaussianComponent {
                mean: [mean[0], mean[1]],
                cov: [[cov[(0, 0)], cov[(0, 1)]], [cov[(1, 0)], cov[(1, 1)]]],
                weight: r / n,
            };
        }
        let current = model.log_likelihood(shots)?;
        let previous = *ll.last().expect("initial likelihood");
        if current < previous - 1e-9 * previous.abs().max(1.0) {
            return Err(Error::Fit(format!("log-likelihood decreased at iteration {it}: {previous} -> {current}")));
        }
        ll.push(current);
        if (current - previous).abs() / n < opts.tol {
            return Ok(GmmFit { model, log_likelihood: ll, iterations: it });
        }
    }
    Err(Error::Fit(format!("EM did not converge in {} iterations", opts.max_iter)))
}

/// Misassignment probability of the planted model with equal priors over
/// the first `levels` components, integrated on a square grid.
pub fn bayes_error(model: &GaussianMixture3, levels: usize, grid: usize) -> f64 {
    let comps = &model.components[..levels];
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for c in comps {
        for a in 0..2 {
            let s = 8.0 * c.cov[a][a].sqrt();
            lo[a] = lo[a].min(c.mean[a] - s);
            hi[a] = hi[a].max(c.mean[a] + s);
        }
    }
    let h = [(hi[0] - lo[0]) / grid as f64, (hi[1] - lo[1]) / grid as f64];
    let correct: f64 = (0..grid)
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            for j in 0..grid {
                let u = [lo[0] + (i as f64 + 0.5) * h[0], lo[1] + (j as f64 + 0.5) * h[1]];
                let best = comps.iter().map(|c| c.log_density(&u).unwrap_or(f64::NEG_INFINITY)).fold(f64::NEG_INFINITY, f64::max);
                acc += best.exp();
            }
            acc
        })
        .sum::<f64>()
        * h[0]
        * h[1];
    1.0 - correct / levels as f64
}
