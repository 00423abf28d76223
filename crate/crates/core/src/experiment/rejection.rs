use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ShotRecord;
use crate::error::{Error, Result};

/// Which leakage flags cause a shot to be discarded.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectionMode {
    #[default]
    None,
    DataOnly,
    AuxOnly,
    Both,
}

impl RejectionMode {
    pub const ALL: [RejectionMode; 4] = [Self::None, Self::DataOnly, Self::AuxOnly, Self::Both];

    pub fn rejects(self, shot: &ShotRecord) -> bool {
        let aux = || shot.aux_leak_flags.iter().any(|&f| f != 0);
        let data = || shot.data_leak_flags != 0;
        match self {
            Self::None => false,
            Self::DataOnly => data(),
            Self::AuxOnly => aux(),
            Self::Both => aux() || data(),
        }
    }
}

impl fmt::Display for RejectionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::None => "none",
            Self::DataOnly => "data_only",
            Self::AuxOnly => "aux_only",
            Self::Both => "both",
        })
    }
}

impl FromStr for RejectionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "none" => Ok(Self::None),
            "data_only" | "data" => Ok(Self::DataOnly),
            "aux_only" | "aux" => Ok(Self::AuxOnly),
            "both" => Ok(Self::Both),
            _ => Err(Error::InvalidInput(format!("unknown rejection mode '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RejectionSummary {
    pub mode: RejectionMode,
    pub total: usize,
    pub heralded: usize,
    pub retained: usize,
    /// Retained fraction of heralded shots.
    pub fraction: f64,
}

/// Keeps heralded shots that carry no leakage flag relevant to `mode`.
pub fn reject_leakage(shots: &[ShotRecord], mode: RejectionMode) -> (Vec<ShotRecord>, RejectionSummary) {
    let heralded: Vec<&ShotRecord> = shots.iter().filter(|s| s.herald_ok).collect();
    let kept: Vec<ShotRecord> = heralded.iter().filter(|s| !mode.rejects(s)).map(|&s| s.clone()).collect();
    let fraction = if heralded.is_empty() { 0.0 } else { kept.len() as f64 / heralded.len() as f64 };
    let summary = RejectionSummary { mode, total: shots.len(), heralded: heralded.len(), retained: kept.len(), fraction };
    (kept, summary)
}

/// `r(n) = A r_c^n`, fitted by least squares on `ln r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RetentionFit {
    pub amplitude: f64,
    pub r_c: f64,
}

pub fn fit_retention(points: &[(u32, f64)]) -> Result<RetentionFit> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|&&(_, r)| r > 0.0).map(|&(n, r)| (n as f64, r.ln())).collect();
    let distinct = {
        let mut ns: Vec<u32> = points.iter().filter(|p| p.1 > 0.0).map(|p| p.0).collect();
        ns.sort_unstable();
        ns.dedup();
        ns.len()
    };
    if distinct < 2 {
        return Err(Error::InsufficientData("retention fit needs two cycle counts with r > 0".into()));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Ok(RetentionFit { amplitude: (my - slope * mx).exp(), r_c: slope.exp() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_exponential_is_recovered() {
        let pts: Vec<(u32, f64)> = [1, 2, 4, 8, 16].iter().map(|&n| (n, 0.95 * 0.92f64.powi(n as i32))).collect();
        let fit = fit_retention(&pts).unwrap();
        assert!((fit.r_c - 0.92).abs() < 1e-12);
        assert!((fit.amplitude - 0.95).abs() < 1e-12);
        assert!(fit_retention(&[(3, 0.5)]).is_err());
    }

    #[test]
    fn mode_names_round_trip() {
        for m in RejectionMode::ALL {
            assert_eq!(m.to_string().parse::<RejectionMode>().unwrap(), m);
        }
    }
}
