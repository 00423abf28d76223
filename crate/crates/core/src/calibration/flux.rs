use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest accepted condition number.
pub const MAX_CONDITION: f64 = 1e12;

/// Flux response `Φ = C V`: entry `(j, i)` is `dΦ_j / dV_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct CrosstalkMatrix(DMatrix<f64>);

impl CrosstalkMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::SizeMismatch { expected: m.nrows(), got: m.ncols() });
        }
        if let Some(i) = (0..m.nrows()).find(|&i| m[(i, i)] == 0.0) {
            return Err(Error::InvalidInput(format!("diagonal element {i} is zero")));
        }
        Ok(Self(m))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn condition_number(&self) -> f64 {
        let sv = self.0.singular_values();
        let max = sv.max();
        let min = sv.min();
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    pub fn inverse(&self) -> Result<DMatrix<f64>> {
        let cond = self.condition_number();
        if cond.is_nan() || cond >= MAX_CONDITION {
            return Err(Error::Singular(cond));
        }
        self.0.clone().try_inverse().ok_or(Error::Singular(cond))
    }

    /// Mean magnitude of the off-diagonal elements relative to the mean
    /// diagonal magnitude.
    pub fn mean_off_diagonal(&self) -> f64 {
        let n = self.dim();
        if n < 2 {
            return 0.0;
        }
        let diag = (0..n).map(|i| self.0[(i, i)].abs()).sum::<f64>() / n as f64;
        let off: f64 =
            (0..n).flat_map(|j| (0..n).map(move |i| (j, i))).filter(|(j, i)| j != i).map(|(j, i)| self.0[(j, i)].abs()).sum();
        off / (n * (n - 1)) as f64 / diag
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        for row in self.0.row_iter() {
            w.write_record(row.iter().map(|v| format!("{v:e}")))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(input);
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|s| s.parse::<f64>().map_err(|e| Error::InvalidInput(format!("bad matrix entry '{s}': {e}"))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::SizeMismatch { expected: n, got: bad.len() });
        }
        Self::new(DMatrix::from_fn(n, n, |j, i| rows[j][i]))
    }
}

/// Voltages `V′ = C⁻¹ Φ′` producing the target fluxes.
pub fn compensate(c: &CrosstalkMatrix, target: &[f64]) -> Result<Vec<f64>> {
    if target.len() != c.dim() {
        return Err(Error::SizeMismatch { expected: c.dim(), got: target.len() });
    }
    let v = c.inverse()? * DVector::from_column_slice(target);
    Ok(v.iter().copied().collect())
}

/// Unit-diagonal crosstalk matrix whose off-diagonal elements have magnitude
/// `off` and random sign.
pub fn planted_crosstalk(n: usize, off: f64, seed: u64) -> CrosstalkMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = DMatrix::from_fn(n, n, |j, i| {
        if i == j {
            1.0
        } else if rng.random::<bool>() {
            off
        } else {
            -off
        }
    });
    CrosstalkMatrix(m)
}

/// A crosstalk measurement: the true matrix plus independent Gaussian noise
/// of standard deviation `noise` on every element.
pub fn measure_crosstalk<R: Rng + ?Sized>(truth: &DMatrix<f64>, noise: f64, rng: &mut R) -> Result<CrosstalkMatrix> {
    if noise == 0.0 {
        return CrosstalkMatrix::new(truth.clone());
    }
    let dist = Normal::new(0.0, noise).map_err(|e| Error::InvalidInput(e.to_string()))?;
    CrosstalkMatrix::new(truth.map(|v| v + dist.sample(rng)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxRound {
    pub condition_number: f64,
    /// Mean relative off-diagonal of the true residual `C_true C_model⁻¹`.
    pub residual_off_diagonal: f64,
    /// The same quantity as seen by a noisy re-measurement.
    pub measured_off_diagonal: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxReport {
    pub paper_metric: String,
    pub initial_off_diagonal: f64,
    pub rounds: Vec<FluxRound>,
    /// Ratio of the initial to the final residual off-diagonal.
    pub suppression: f64,
}

/// Iterative compensation: measure `C_true`, invert, re-measure the
/// residual crosstalk of the compensated lines and fold it into the model.
pub fn flux_compensation_study(truth: &CrosstalkMatrix, noise: f64, rounds: usize, seed: u64) -> Result<FluxReport> {
    if rounds == 0 {
        return Err(Error::InvalidInput("at least one compensation round is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = measure_crosstalk(truth.matrix(), noise, &mut rng)?;
    let mut out = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let inv = model.inverse()?;
        let residual = CrosstalkMatrix::new(truth.matrix() * &inv)?;
        let measured = measure_crosstalk(residual.matrix(), noise, &mut rng)?;
        out.push(FluxRound {
            condition_number: model.condition_number(),
            residual_off_diagonal: residual.mean_off_diagonal(),
            measured_off_diagonal: measured.mean_off_diagonal(),
        });
        model = CrosstalkMatrix::new(measured.matrix() * model.matrix())?;
    }
    let initial = truth.mean_off_diagonal();
    let last = out.last().expect("at least one round").residual_off_diagonal;
    Ok(FluxReport {
        paper_metric: "flux_crosstalk_suppression".into(),
        initial_off_diagonal: initial,
        rounds: out,
        suppression: if last > 0.0 { initial / last } else { f64::INFINITY },
    })
}
