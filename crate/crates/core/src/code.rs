//! Surface-17 layout, stabilizers, logical operators and the two-qubit gate
//! schedule, with hook-error validation of schedules.
//!
//! Data qubits sit on a 3×3 grid, numbered row-major:
//!
//! ```text
//!   D1 D2 D3
//!   D4 D5 D6
//!   D7 D8 D9
//! ```
//!
//! `Ẑ_L = Ẑ₁Ẑ₂Ẑ₃` runs along the top row and `X̂_L = X̂₁X̂₄X̂₇` down the left
//! column. Register indices: data `0..9`, Z auxiliaries `9..13`, X
//! auxiliaries `13..17`. Stabilizer indices follow the same order: `Z1..Z4`
//! are `0..4` and `X1..X4` are `4..8`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{Pauli, PauliString};

pub const NUM_DATA: usize = 9;
pub const NUM_AUX: usize = 8;
pub const NUM_QUBITS: usize = NUM_DATA + NUM_AUX;
pub const NUM_STABILIZERS: usize = 8;
pub const NUM_STEPS: usize = 8;

/// Stabilizer or logical basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    X,
    Z,
}

impl Basis {
    pub fn opposite(self) -> Basis {
        match self {
            Basis::X => Basis::Z,
            Basis::Z => Basis::X,
        }
    }

    pub fn pauli(self) -> Pauli {
        match self {
            Basis::X => Pauli::X,
            Basis::Z => Pauli::Z,
        }
    }

    /// Stabilizer indices of this basis, in `Z1..Z4` / `X1..X4` order.
    pub fn stabilizers(self) -> std::ops::Range<usize> {
        match self {
            Basis::Z => 0..4,
            Basis::X => 4..8,
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::X => "X",
            Basis::Z => "Z",
        })
    }
}

impl FromStr for Basis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "X" | "x" => Ok(Basis::X),
            "Z" | "z" => Ok(Basis::Z),
            _ => Err(Error::InvalidInput(format!("unknown basis '{s}'"))),
        }
    }
}

/// One of the 17 physical qubits. Labels are 1-based as on the device.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QubitId {
    Data(u8),
    AuxX(u8),
    AuxZ(u8),
}

impl QubitId {
    pub fn index(self) -> usize {
        match self {
            QubitId::Data(i) => i as usize - 1,
            QubitId::AuxZ(i) => NUM_DATA + i as usize - 1,
            QubitId::AuxX(i) => NUM_DATA + 4 + i as usize - 1,
        }
    }

    pub fn from_index(index: usize) -> Option<QubitId> {
        match index {
            0..=8 => Some(QubitId::Data(index as u8 + 1)),
            9..=12 => Some(QubitId::AuxZ((index - 8) as u8)),
            13..=16 => Some(QubitId::AuxX((index - 12) as u8)),
            _ => None,
        }
    }

    pub fn all() -> impl Iterator<Item = QubitId> {
        (0..NUM_QUBITS).filter_map(QubitId::from_index)
    }

    pub fn is_data(self) -> bool {
        matches!(self, QubitId::Data(_))
    }

    /// Stabilizer index measured by an auxiliary qubit.
    pub fn stabilizer(self) -> Option<usize> {
        match self {
            QubitId::Data(_) => None,
            aux => Some(aux.index() - NUM_DATA),
        }
    }

    /// `(row, column)` on the data grid.
    pub fn grid(self) -> Option<(usize, usize)> {
        match self {
            QubitId::Data(i) => Some(((i as usize - 1) / 3, (i as usize - 1) % 3)),
            _ => None,
        }
    }
}

impl fmt::Display for QubitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QubitId::Data(i) => write!(f, "D{i}"),
            QubitId::AuxX(i) => write!(f, "X{i}"),
            QubitId::AuxZ(i) => write!(f, "Z{i}"),
        }
    }
}

impl FromStr for QubitId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("unknown qubit '{s}'"));
        let (kind, num) = s.split_at(s.find(|c: char| c.is_ascii_digit()).ok_or_else(bad)?);
        let i: u8 = num.parse().map_err(|_| bad())?;
        let q = match kind {
            "D" if (1..=9).contains(&i) => QubitId::Data(i),
            "X" if (1..=4).contains(&i) => QubitId::AuxX(i),
            "Z" if (1..=4).contains(&i) => QubitId::AuxZ(i),
            _ => return Err(bad()),
        };
        Ok(q)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerSpec {
    pub auxiliary: QubitId,
    pub basis: Basis,
    pub support: Vec<QubitId>,
}

impl StabilizerSpec {
    /// Bit mask of the supporting data qubits.
    pub fn data_mask(&self) -> u64 {
        self.support.iter().fold(0, |m, q| m | 1 << q.index())
    }

    /// The stabilizer as a Pauli string on the 9 data qubits.
    pub fn pauli(&self) -> PauliString {
        let qs: Vec<usize> = self.support.iter().map(|q| q.index()).collect();
        PauliString::uniform(NUM_DATA, &qs, self.basis.pauli())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogicalOperator {
    pub basis: Basis,
    pub support: [QubitId; 3],
}

impl LogicalOperator {
    pub fn data_mask(&self) -> u64 {
        self.support.iter().fold(0, |m, q| m | 1 << q.index())
    }

    pub fn pauli(&self) -> PauliString {
        let qs: Vec<usize> = self.support.iter().map(|q| q.index()).collect();
        PauliString::uniform(NUM_DATA, &qs, self.basis.pauli())
    }
}

/// CZ gates grouped into eight time steps. Steps `1..=4` (indices `0..4`)
/// hold the Z-type plaquettes, steps `5..=8` the X-type ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GateSchedule {
    pub steps: Vec<Vec<(QubitId, QubitId)>>,
}

impl GateSchedule {
    /// Data qubits touched by `aux`, in gate order, with their step indices.
    pub fn sequence(&self, aux: QubitId) -> Vec<(usize, QubitId)> {
        let mut out = Vec::new();
        for (k, step) in self.steps.iter().enumerate() {
            for &(a, d) in step {
                if a == aux {
                    out.push((k, d));
                }
            }
        }
        out
    }

    /// Structural checks: eight steps, ≤3 disjoint gates per step, every
    /// stabilizer/data pair exactly once and in the right half of the cycle.
    pub fn check(&self, code: &Surface17) -> Result<()> {
        if self.steps.len() != NUM_STEPS {
            return Err(Error::Schedule(format!("expected 8 steps, got {}", self.steps.len())));
        }
        let mut seen = std::collections::HashSet::new();
        for (k, step) in self.steps.iter().enumerate() {
            if step.len() > 3 {
                return Err(Error::Schedule(format!("step {} has {} gates", k + 1, step.len())));
            }
            let mut used = 0u64;
            for &(a, d) in step {
                let stab = a.stabilizer().ok_or_else(|| Error::Schedule(format!("{a} is not an auxiliary qubit")))?;
                if !d.is_data() {
                    return Err(Error::Schedule(format!("{d} is not a data qubit")));
                }
                let basis = code.stabilizers[stab].basis;
                let in_half = match basis {
                    Basis::Z => k < 4,
                    Basis::X => k >= 4,
                };
                if !in_half {
                    return Err(Error::Schedule(format!("{a}-{d} scheduled outside its half-cycle")));
                }
                if !code.stabilizers[stab].support.contains(&d) {
                    return Err(Error::Schedule(format!("{d} is not in the support of {a}")));
                }
                let bits = 1u64 << a.index() | 1u64 << d.index();
                if used & bits != 0 {
                    return Err(Error::Schedule(format!("qubit reused within step {}", k + 1)));
                }
                used |= bits;
                if !seen.insert((a, d)) {
                    return Err(Error::Schedule(format!("{a}-{d} scheduled twice")));
                }
            }
        }
        let expected: usize = code.stabilizers.iter().map(|s| s.support.len()).sum();
        if seen.len() != expected {
            return Err(Error::Schedule(format!("{} of {expected} stabilizer gates scheduled", seen.len())));
        }
        Ok(())
    }

    /// Plain-text table, one line per step: `3: Z2-D4 Z3-D5 Z4-D6`.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        for (k, step) in self.steps.iter().enumerate() {
            let pairs: Vec<String> = step.iter().map(|(a, d)| format!("{a}-{d}")).collect();
            s.push_str(&format!("{}: {}\n", k + 1, pairs.join(" ")));
        }
        s
    }

    pub fn from_table(text: &str) -> Result<Self> {
        let mut steps = vec![Vec::new(); NUM_STEPS];
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (idx, rest) = line.split_once(':').ok_or_else(|| Error::Schedule(format!("missing ':' in '{line}'")))?;
            let k: usize = idx.trim().parse().map_err(|_| Error::Schedule(format!("bad step index '{idx}'")))?;
            if !(1..=NUM_STEPS).contains(&k) {
                return Err(Error::Schedule(format!("step index {k} out of range")));
            }
            for pair in rest.split_whitespace() {
                let (a, d) = pair.split_once('-').ok_or_else(|| Error::Schedule(format!("bad pair '{pair}'")))?;
                steps[k - 1].push((a.parse()?, d.parse()?));
            }
        }
        Ok(Self { steps })
    }
}

/// The canonical code objects.
#[derive(Clone, Debug)]
pub struct Surface17 {
    pub stabilizers: [StabilizerSpec; NUM_STABILIZERS],
    pub logical_z: LogicalOperator,
    pub logical_x: LogicalOperator,
    pub schedule: GateSchedule,
}

fn d(i: u8) -> QubitId {
    QubitId::Data(i)
}

fn stab(aux: QubitId, basis: Basis, support: &[u8]) -> StabilizerSpec {
    StabilizerSpec { auxiliary: aux, basis, support: support.iter().map(|&i| d(i)).collect() }
}

/// Gate order used on the device. The last two gates of every weight-four
/// plaquette avoid the direction of the matching logical string; `Z3` ends
/// on the diagonal pair D5, D3.
pub fn paper_schedule() -> GateSchedule {
    use QubitId::{AuxX as X, AuxZ as Z};
    GateSchedule {
        steps: vec![
            vec![(Z(1), d(1)), (Z(2), d(5)), (Z(3), d(2))],
            vec![(Z(2), d(8)), (Z(3), d(6)), (Z(4), d(9))],
            vec![(Z(2), d(4)), (Z(3), d(5)), (Z(4), d(6))],
            vec![(Z(2), d(7)), (Z(3), d(3)), (Z(1), d(4))],
            vec![(X(1), d(2)), (X(2), d(1)), (X(3), d(5))],
            vec![(X(2), d(2)), (X(3), d(6)), (X(4), d(7))],
            vec![(X(2), d(4)), (X(3), d(8)), (X(1), d(3))],
            vec![(X(2), d(5)), (X(3), d(9)), (X(4), d(8))],
        ],
    }
}

/// Builds the layout, stabilizers, logical operators and gate schedule.
pub fn build_surface17() -> Surface17 {
    use QubitId::{AuxX, AuxZ};
    Surface17 {
        stabilizers: [
            stab(AuxZ(1), Basis::Z, &[1, 4]),
            stab(AuxZ(2), Basis::Z, &[4, 5, 7, 8]),
            stab(AuxZ(3), Basis::Z, &[2, 3, 5, 6]),
            stab(AuxZ(4), Basis::Z, &[6, 9]),
            stab(AuxX(1), Basis::X, &[2, 3]),
            stab(AuxX(2), Basis::X, &[1, 2, 4, 5]),
            stab(AuxX(3), Basis::X, &[5, 6, 8, 9]),
            stab(AuxX(4), Basis::X, &[7, 8]),
        ],
        logical_z: LogicalOperator { basis: Basis::Z, support: [d(1), d(2), d(3)] },
        logical_x: LogicalOperator { basis: Basis::X, support: [d(1), d(4), d(7)] },
        schedule: paper_schedule(),
    }
}

impl Surface17 {
    pub fn logical(&self, basis: Basis) -> &LogicalOperator {
        match basis {
            Basis::X => &self.logical_x,
            Basis::Z => &self.logical_z,
        }
    }

    pub fn stabilizer_of(&self, aux: QubitId) -> Option<&StabilizerSpec> {
        aux.stabilizer().map(|i| &self.stabilizers[i])
    }

    /// The same code with a different gate schedule.
    pub fn with_schedule(&self, schedule: GateSchedule) -> Result<Surface17> {
        let code = Surface17 { schedule, ..self.clone() };
        code.schedule.check(self)?;
        Ok(code)
    }
}

/// Data error produced by an auxiliary-qubit Pauli injected right after CZ
/// step `after_step` (1-based; `0` means before the first step).
///
/// An auxiliary X (or Y) picks up the stabilizer's own Pauli on every data
/// qubit it meets later in the schedule; auxiliary Z errors commute through
/// the CZ gates. For X-type plaquettes the result is expressed in the
/// computational frame, i.e. as X errors on the data.
pub fn propagate_auxiliary_error(
    code: &Surface17,
    schedule: &GateSchedule,
    aux: QubitId,
    after_step: usize,
    error: Pauli,
) -> Result<PauliString> {
    let spec = code.stabilizer_of(aux).ok_or_else(|| Error::InvalidInput(format!("{aux} is not an auxiliary qubit")))?;
    let half = match spec.basis {
        Basis::Z => 0..=4,
        Basis::X => 4..=8,
    };
    if !half.contains(&after_step) {
        return Err(Error::InvalidInput(format!("step {after_step} is outside the half-cycle of {aux}")));
    }
    let mut out = PauliString::identity(NUM_DATA);
    if !error.bits().0 {
        return Ok(out);
    }
    for (k, q) in schedule.sequence(aux) {
        if k >= after_step {
            out = out * PauliString::single(NUM_DATA, q.index(), spec.basis.pauli());
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScheduleViolation {
    pub auxiliary: String,
    pub data: [String; 2],
    pub reason: String,
}

/// Hook-error check: the weight-two data error left by an auxiliary X in the
/// middle of each weight-four plaquette must not lie along the matching
/// logical string (same row for Z-type, same column for X-type).
pub fn validate_schedule(code: &Surface17, schedule: &GateSchedule) -> Result<Vec<ScheduleViolation>> {
    schedule.check(code)?;
    let mut out = Vec::new();
    for spec in code.stabilizers.iter().filter(|s| s.support.len() == 4) {
        let seq = schedule.sequence(spec.auxiliary);
        let tail = [seq[2].1, seq[3].1];
        let (a, b) = (tail[0].grid().unwrap(), tail[1].grid().unwrap());
        let aligned = match spec.basis {
            Basis::Z => a.0 == b.0,
            Basis::X => a.1 == b.1,
        };
        if aligned {
            out.push(ScheduleViolation {
                auxiliary: spec.auxiliary.to_string(),
                data: [tail[0].to_string(), tail[1].to_string()],
                reason: format!("hook error {}{}{} lies along the logical {} string", spec.basis, tail[0], tail[1], spec.basis),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qubit_ids_are_distinct_and_round_trip() {
        let ids: Vec<QubitId> = QubitId::all().collect();
        assert_eq!(ids.len(), 17);
        for (i, q) in ids.iter().enumerate() {
            assert_eq!(q.index(), i);
            assert_eq!(q.to_string().parse::<QubitId>().unwrap(), *q);
        }
        assert!("D10".parse::<QubitId>().is_err());
    }

    #[test]
    fn z1_support() {
        let code = build_surface17();
        assert_eq!(code.stabilizers[0].support, vec![d(1), d(4)]);
        assert_eq!(code.stabilizers[5].pauli().to_string(), "+XXIXXIIII");
    }

    #[test]
    fn stabilizers_commute_and_logicals_anticommute() {
        let code = build_surface17();
        for a in &code.stabilizers {
            for b in &code.stabilizers {
                assert!(a.pauli().commutes_with(&b.pauli()));
            }
            assert!(a.pauli().commutes_with(&code.logical_z.pauli()));
            assert!(a.pauli().commutes_with(&code.logical_x.pauli()));
        }
        assert!(!code.logical_z.pauli().commutes_with(&code.logical_x.pauli()));
        assert_eq!(code.logical_z.data_mask() & code.logical_x.data_mask(), 1);
    }

    #[test]
    fn paper_schedule_is_well_formed_and_valid() {
        let code = build_surface17();
        code.schedule.check(&code).unwrap();
        assert!(validate_schedule(&code, &code.schedule).unwrap().is_empty());
    }

    #[test]
    fn z2_hook_hits_d4_d7() {
        let code = build_surface17();
        let e = propagate_auxiliary_error(&code, &code.schedule, QubitId::AuxZ(2), 2, Pauli::X).unwrap();
        assert_eq!(e.to_string(), "+IIIZIIZII");
        let z = propagate_auxiliary_error(&code, &code.schedule, QubitId::AuxZ(2), 2, Pauli::Z).unwrap();
        assert!(z.is_identity_up_to_phase());
        assert!(propagate_auxiliary_error(&code, &code.schedule, QubitId::AuxZ(2), 6, Pauli::X).is_err());
    }

    #[test]
    fn horizontal_z2_tail_is_rejected() {
        let code = build_surface17();
        let mut s = paper_schedule();
        // Z2 order becomes D5, D4, D8, D7: the tail is horizontal.
        s.steps[1][0] = (QubitId::AuxZ(2), d(4));
        s.steps[2][0] = (QubitId::AuxZ(2), d(8));
        let e = propagate_auxiliary_error(&code, &s, QubitId::AuxZ(2), 2, Pauli::X).unwrap();
        assert_eq!(e.to_string(), "+IIIIIIZZI");
        let v = validate_schedule(&code, &s).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].auxiliary, "Z2");
    }

    #[test]
    fn table_round_trip() {
        let s = paper_schedule();
        assert_eq!(GateSchedule::from_table(&s.to_table()).unwrap(), s);
    }

    #[test]
    fn malformed_schedule_is_an_error() {
        let code = build_surface17();
        let mut s = paper_schedule();
        s.steps[0].pop();
        assert!(validate_schedule(&code, &s).is_err());
    }
}
