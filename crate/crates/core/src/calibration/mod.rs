//! Calibration analyses on synthetic data: three-level readout
//! classification, flux-crosstalk compensation, drive crosstalk and
//! measurement-induced dephasing.

mod flux;
mod gmm;
mod readout;

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub use flux::{
    compensate, flux_compensation_study, measure_crosstalk, planted_crosstalk, CrosstalkMatrix, FluxReport, FluxRound,
    MAX_CONDITION,
};
pub use gmm::{bayes_error, fit_gmm3, synthesize_iq, GaussianComponent, GaussianMixture3, GmmFit, GmmOptions, IqBatch, IqShot};
pub use readout::{confusion_matrix, readout_error, readout_error_from_confusion};

/// Smallest resolvable `log10(a_cross / a_target)`.
pub const DRIVE_RESOLUTION_LOG10: f64 = -1.6;

/// Suppression of a cross-driven qubit relative to the target.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DriveCrosstalk {
    /// `−log10(a_cross / a_target)`.
    Suppression(f64),
    /// The cross-drive amplitude is below the resolution floor.
    BelowResolution,
}

impl fmt::Display for DriveCrosstalk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Suppression(s) => write!(f, "{s:.3}"),
            Self::BelowResolution => write!(f, "< {DRIVE_RESOLUTION_LOG10}"),
        }
    }
}

impl Serialize for DriveCrosstalk {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Suppression(v) => s.serialize_f64(*v),
            Self::BelowResolution => s.serialize_str(&self.to_string()),
        }
    }
}

pub fn drive_crosstalk_ratio(a_target: f64, a_cross: f64) -> Result<DriveCrosstalk> {
    if !(a_target > 0.0 && a_cross > 0.0) {
        return Err(Error::InvalidInput(format!("amplitudes must be positive (target {a_target}, cross {a_cross})")));
    }
    let log_ratio = (a_cross / a_target).log10();
    Ok(if log_ratio < DRIVE_RESOLUTION_LOG10 { DriveCrosstalk::BelowResolution } else { DriveCrosstalk::Suppression(-log_ratio) })
}

/// Phase-flip probability `P_φ = (1 − e^{−Γτ})/2` of a spectator during a
/// readout of duration `tau_ns`, for a dephasing rate `gamma_per_us`.
pub fn dephasing_to_flip(gamma_per_us: f64, tau_ns: f64) -> Result<f64> {
    if !(gamma_per_us >= 0.0 && tau_ns >= 0.0) {
        return Err(Error::InvalidInput(format!("negative rate {gamma_per_us} or duration {tau_ns}")));
    }
    let x = gamma_per_us * tau_ns * 1e-3;
    Ok(if x.is_infinite() { 0.5 } else { -(-x).exp_m1() / 2.0 })
}
