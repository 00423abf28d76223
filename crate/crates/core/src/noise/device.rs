use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::code::{QubitId, NUM_QUBITS};
use crate::error::{Error, Result};

const BUNDLED: &str = include_str!("../../data/surface17_device.toml");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitParams {
    pub t1_us: f64,
    /// Ramsey decay time `T2*`.
    pub t2_star_us: f64,
    /// Echo decay time `T2e`.
    pub t2_echo_us: f64,
    pub eps_1q: f64,
    pub eps_ro2: f64,
    pub eps_ro3: f64,
    /// Thermal excited-state population.
    pub p_th: f64,
}

impl QubitParams {
    pub fn noiseless() -> Self {
        Self {
            t1_us: f64::INFINITY,
            t2_star_us: f64::INFINITY,
            t2_echo_us: f64::INFINITY,
            eps_1q: 0.0,
            eps_ro2: 0.0,
            eps_ro3: 0.0,
            p_th: 0.0,
        }
    }

    fn scaled(&self, x: f64) -> Self {
        Self {
            t1_us: self.t1_us * x,
            t2_star_us: self.t2_star_us * x,
            t2_echo_us: self.t2_echo_us * x,
            eps_1q: self.eps_1q / x,
            eps_ro2: self.eps_ro2 / x,
            eps_ro3: self.eps_ro3 / x,
            p_th: self.p_th / x,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub cycle_ns: f64,
    pub gate_1q_ns: f64,
    pub cz_step_ns: f64,
    pub aux_readout_ns: f64,
    pub data_readout_ns: f64,
    pub herald_readout_ns: f64,
}

impl Timing {
    pub fn cycle_us(&self) -> f64 {
        self.cycle_ns * 1e-3
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoQubitDefaults {
    pub eps_2q: f64,
    pub t2_int_ratio: f64,
}

/// Per-pair CZ overrides, keyed in the file as `pair = "Z1-D1"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairParams {
    pub pair: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_2q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2_int_us: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeakageParams {
    /// Probability per auxiliary qubit and cycle of leaking.
    pub aux_leak: f64,
    /// Probability per auxiliary readout of a spurious leakage flag.
    pub aux_false_positive: f64,
    /// Probability per data qubit and cycle of leaking.
    pub data_leak: f64,
    /// Probability per data qubit of a spurious flag at the final readout.
    pub data_false_positive: f64,
}

impl LeakageParams {
    pub fn none() -> Self {
        Self { aux_leak: 0.0, aux_false_positive: 0.0, data_leak: 0.0, data_false_positive: 0.0 }
    }
}

#[derive(Serialize, Deserialize)]
struct DeviceFile {
    timing: Timing,
    two_qubit: TwoQubitDefaults,
    leakage: LeakageParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    average: Option<QubitParams>,
    qubits: BTreeMap<String, QubitParams>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pairs: Vec<PairParams>,
}

/// Calibrated device description: per-qubit coherence and error rates, CZ
/// pair errors, timing and leakage.
#[derive(Clone, Debug, PartialEq)]
pub struct DeviceParams {
    /// Indexed by register index (see [`QubitId::index`]).
    pub qubits: Vec<QubitParams>,
    pub pairs: BTreeMap<(usize, usize), PairParams>,
    pub two_qubit: TwoQubitDefaults,
    pub timing: Timing,
    pub leakage: LeakageParams,
    pub average: Option<QubitParams>,
}

fn check_prob(name: &str, p: f64, max: f64) -> Result<()> {
    if (0.0..=max).contains(&p) {
        Ok(())
    } else {
        Err(Error::Device(format!("{name} = {p} is outside [0, {max}]")))
    }
}

fn check_time(name: &str, t: f64) -> Result<()> {
    if t > 0.0 {
        Ok(())
    } else {
        Err(Error::Device(format!("{name} = {t} must be positive")))
    }
}

impl DeviceParams {
    /// The bundled parameter set of the measured device.
    pub fn paper() -> Self {
        Self::from_toml_str(BUNDLED).expect("bundled device file is valid")
    }

    pub fn bundled_toml() -> &'static str {
        BUNDLED
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: DeviceFile = toml::from_str(text)?;
        let mut qubits = Vec::with_capacity(NUM_QUBITS);
        for q in QubitId::all() {
            let name = q.to_string();
            let params = file.qubits.get(&name).ok_or_else(|| Error::Device(format!("missing parameters for {name}")))?;
            qubits.push(params.clone());
        }
        if let Some(extra) = file.qubits.keys().find(|k| k.parse::<QubitId>().is_err()) {
            return Err(Error::Device(format!("unknown qubit '{extra}'")));
        }
        let mut pairs = BTreeMap::new();
        for p in file.pairs {
            let (a, d) = p.pair.split_once('-').ok_or_else(|| Error::Device(format!("bad pair '{}'", p.pair)))?;
            let key = (a.parse::<QubitId>()?.index(), d.parse::<QubitId>()?.index());
            pairs.insert(key, p);
        }
        let mut dev =
            Self { qubits, pairs, two_qubit: file.two_qubit, timing: file.timing, leakage: file.leakage, average: file.average };
        dev.validate()?;
        Ok(dev)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        let file = DeviceFile {
            timing: self.timing.clone(),
            two_qubit: self.two_qubit.clone(),
            leakage: self.leakage.clone(),
            average: self.average.clone(),
            qubits: QubitId::all().map(|q| (q.to_string(), self.qubits[q.index()].clone())).collect(),
            pairs: self.pairs.values().cloned().collect(),
        };
        toml::to_string(&file).map_err(|e| Error::Device(e.to_string()))
    }

    /// Range checks; dephasing times above `2·T1` are clamped and logged.
    pub fn validate(&mut self) -> Result<()> {
        if self.qubits.len() != NUM_QUBITS {
            return Err(Error::SizeMismatch { expected: NUM_QUBITS, got: self.qubits.len() });
        }
        for (i, q) in self.qubits.iter_mut().enumerate() {
            let name = QubitId::from_index(i).unwrap().to_string();
            check_time(&format!("{name}.t1_us"), q.t1_us)?;
            check_time(&format!("{name}.t2_star_us"), q.t2_star_us)?;
            check_time(&format!("{name}.t2_echo_us"), q.t2_echo_us)?;
            check_prob(&format!("{name}.eps_1q"), q.eps_1q, 1.0)?;
            check_prob(&format!("{name}.eps_ro2"), q.eps_ro2, 0.5)?;
            check_prob(&format!("{name}.eps_ro3"), q.eps_ro3, 1.0)?;
            check_prob(&format!("{name}.p_th"), q.p_th, 1.0)?;
            let limit = 2.0 * q.t1_us;
            for (label, t2) in [("T2*", &mut q.t2_star_us), ("T2e", &mut q.t2_echo_us)] {
                if *t2 > limit {
                    log::info!("{name}: {label} = {t2} µs exceeds 2·T1 = {limit} µs; clamped");
                    *t2 = limit;
                }
            }
        }
        for p in self.pairs.values() {
            if let Some(e) = p.eps_2q {
                check_prob(&format!("{}.eps_2q", p.pair), e, 0.8)?;
            }
            if let Some(t) = p.t2_int_us {
                check_time(&format!("{}.t2_int_us", p.pair), t)?;
            }
        }
        check_prob("two_qubit.eps_2q", self.two_qubit.eps_2q, 0.8)?;
        check_time("two_qubit.t2_int_ratio", self.two_qubit.t2_int_ratio)?;
        let t = &self.timing;
        for (name, v) in [
            ("cycle_ns", t.cycle_ns),
            ("gate_1q_ns", t.gate_1q_ns),
            ("cz_step_ns", t.cz_step_ns),
            ("aux_readout_ns", t.aux_readout_ns),
            ("data_readout_ns", t.data_readout_ns),
            ("herald_readout_ns", t.herald_readout_ns),
        ] {
            check_time(&format!("timing.{name}"), v)?;
        }
        let l = &self.leakage;
        check_prob("leakage.aux_leak", l.aux_leak, 1.0)?;
        check_prob("leakage.aux_false_positive", l.aux_false_positive, 1.0)?;
        check_prob("leakage.data_leak", l.data_leak, 1.0)?;
        check_prob("leakage.data_false_positive", l.data_false_positive, 1.0)?;
        Ok(())
    }

    pub fn qubit(&self, q: QubitId) -> &QubitParams {
        &self.qubits[q.index()]
    }

    /// CZ error of the pair `(aux, data)` given as register indices.
    pub fn eps_2q(&self, aux: usize, data: usize) -> f64 {
        self.pairs.get(&(aux, data)).and_then(|p| p.eps_2q).unwrap_or(self.two_qubit.eps_2q)
    }

    /// Dephasing time of `qubit` while it takes part in the CZ `(aux, data)`.
    pub fn t2_interaction(&self, aux: usize, data: usize, qubit: usize) -> f64 {
        self.pairs
            .get(&(aux, data))
            .and_then(|p| p.t2_int_us)
            .unwrap_or(self.qubits[qubit].t2_star_us / self.two_qubit.t2_int_ratio)
    }

    /// Every qubit set to the same parameters, without per-pair overrides.
    pub fn uniform(&self, params: &QubitParams) -> Self {
        let mut dev = Self { qubits: vec![params.clone(); NUM_QUBITS], pairs: BTreeMap::new(), ..self.clone() };
        dev.validate().expect("uniform device from valid parameters");
        dev
    }

    /// Uniform device built from the device-average column.
    pub fn uniform_average(&self) -> Result<Self> {
        let avg = self.average.as_ref().ok_or_else(|| Error::Device("no [average] table in device file".into()))?;
        Ok(self.uniform(avg))
    }

    /// Improved device: error probabilities divided by `x`, coherence times
    /// multiplied by `x`.
    pub fn scaled(&self, x: f64) -> Result<Self> {
        if x.is_nan() || x < 1.0 {
            return Err(Error::InvalidInput(format!("improvement factor {x} must be ≥ 1")));
        }
        let mut dev = self.clone();
        dev.qubits = self.qubits.iter().map(|q| q.scaled(x)).collect();
        dev.average = self.average.as_ref().map(|q| q.scaled(x));
        for p in dev.pairs.values_mut() {
            p.eps_2q = p.eps_2q.map(|e| e / x);
            p.t2_int_us = p.t2_int_us.map(|t| t * x);
        }
        dev.two_qubit.eps_2q /= x;
        let l = &mut dev.leakage;
        l.aux_leak /= x;
        l.aux_false_positive /= x;
        l.data_leak /= x;
        l.data_false_positive /= x;
        dev.validate()?;
        Ok(dev)
    }

    /// Same timing, no noise of any kind.
    pub fn noiseless(&self) -> Self {
        let mut dev = self.uniform(&QubitParams::noiseless());
        dev.two_qubit.eps_2q = 0.0;
        dev.leakage = LeakageParams::none();
        dev.average = None;
        dev
    }

    /// Copy without leakage processes.
    pub fn without_leakage(&self) -> Self {
        Self { leakage: LeakageParams::none(), ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_file_matches_table() {
        let dev = DeviceParams::paper();
        assert_eq!(dev.qubit(QubitId::Data(1)).t1_us, 29.1);
        assert_eq!(dev.qubit(QubitId::AuxX(1)).eps_ro2, 0.027);
        assert_eq!(dev.qubit(QubitId::AuxZ(4)).t2_echo_us, 53.6);
        assert_eq!(dev.two_qubit.eps_2q, 0.015);
        // D7: T2* = 74.8 µs exceeds 2·T1 = 72 µs and is clamped.
        assert_eq!(dev.qubit(QubitId::Data(7)).t2_star_us, 72.0);
    }

    #[test]
    fn toml_round_trip() {
        let dev = DeviceParams::paper();
        let back = DeviceParams::from_toml_str(&dev.to_toml_string().unwrap()).unwrap();
        assert_eq!(dev, back);
    }

    #[test]
    fn invalid_values_are_rejected() {
        let text = DeviceParams::bundled_toml().replace("eps_2q = 0.015", "eps_2q = 1.5");
        assert!(DeviceParams::from_toml_str(&text).is_err());
        let text = DeviceParams::bundled_toml().replace("t1_us = 29.1", "t1_us = -1.0");
        assert!(DeviceParams::from_toml_str(&text).is_err());
    }

    #[test]
    fn scaling_divides_errors_and_stretches_times() {
        let dev = DeviceParams::paper().uniform_average().unwrap();
        let s = dev.scaled(2.0).unwrap();
        assert_eq!(s.qubits[0].t1_us, 65.0);
        assert!((s.qubits[0].eps_1q - 0.00045).abs() < 1e-15);
        assert!((s.two_qubit.eps_2q - 0.0075).abs() < 1e-15);
        assert!(dev.scaled(0.5).is_err());
    }
}
