use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::program::{aux_record, data_record, herald_record, Program};
use super::InitialState;
use crate::code::{Basis, Surface17, NUM_DATA, NUM_QUBITS, NUM_STABILIZERS};
use crate::error::{Error, Result};
use crate::noise::LeakageTrace;

/// Version written to, and required from, every JSON line.
pub const SCHEMA_VERSION: u32 = 1;

/// Outcome of one shot.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub shot: u64,
    pub initial_state: InitialState,
    /// All heralding readouts returned ground.
    pub herald_ok: bool,
    /// Stabilizer values per cycle, `±1`, in stabilizer order (Z1..Z4, X1..X4).
    pub s: Vec<[i8; NUM_STABILIZERS]>,
    /// Per cycle, bit `k` flags auxiliary `k` as leaked.
    pub aux_leak_flags: Vec<u8>,
    /// Bit `j` flags data qubit `j` as leaked at the final readout.
    pub data_leak_flags: u16,
    /// Final data readouts, `±1`.
    pub final_data: [i8; NUM_DATA],
}

fn sign(bit: bool) -> i8 {
    if bit {
        -1
    } else {
        1
    }
}

impl ShotRecord {
    pub(crate) fn from_raw(program: &Program, shot: u64, raw: &[bool], leak: &LeakageTrace) -> Self {
        let n = program.n_cycles;
        let herald_ok = (0..NUM_QUBITS).all(|q| !raw[herald_record(q)]);
        let mut prev = [false; NUM_STABILIZERS];
        let s = (1..=n)
            .map(|m| {
                let mut row = [1; NUM_STABILIZERS];
                for (k, v) in row.iter_mut().enumerate() {
                    let a = raw[aux_record(m, k)];
                    *v = sign(a ^ prev[k]);
                    prev[k] = a;
                }
                row
            })
            .collect();
        let mut final_data = [1; NUM_DATA];
        for (j, v) in final_data.iter_mut().enumerate() {
            *v = sign(raw[data_record(n, j)]);
        }
        ShotRecord {
            shot,
            initial_state: program.state,
            herald_ok,
            s,
            aux_leak_flags: leak.aux_flags.clone(),
            data_leak_flags: leak.data_flags,
            final_data,
        }
    }

    pub fn n_cycles(&self) -> usize {
        self.s.len()
    }

    pub fn basis(&self) -> Basis {
        self.initial_state.basis()
    }

    /// Product of final data readouts over `mask`.
    pub fn data_parity(&self, mask: u64) -> i8 {
        (0..NUM_DATA).filter(|j| mask >> j & 1 == 1).map(|j| self.final_data[j]).product()
    }

    /// Raw logical readout, before any correction.
    pub fn logical_parity(&self, code: &Surface17) -> i8 {
        self.data_parity(code.logical(self.basis()).data_mask())
    }

    fn check(&self) -> Result<()> {
        let ok_pm = |v: i8| v == 1 || v == -1;
        if self.s.iter().flatten().any(|&v| !ok_pm(v)) || self.final_data.iter().any(|&v| !ok_pm(v)) {
            return Err(Error::InvalidInput(format!("shot {}: outcomes must be ±1", self.shot)));
        }
        if self.aux_leak_flags.len() != self.s.len() {
            return Err(Error::SizeMismatch { expected: self.s.len(), got: self.aux_leak_flags.len() });
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct LineOut<'a> {
    schema_version: u32,
    #[serde(flatten)]
    shot: &'a ShotRecord,
}

#[derive(Deserialize)]
struct LineIn {
    schema_version: u32,
    #[serde(flatten)]
    shot: ShotRecord,
}

/// Writes one JSON object per line.
pub fn write_jsonl<W: Write>(mut out: W, shots: &[ShotRecord]) -> Result<()> {
    for shot in shots {
        serde_json::to_writer(&mut out, &LineOut { schema_version: SCHEMA_VERSION, shot })?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads shot records, rejecting unknown schema versions.
pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<ShotRecord>> {
    let mut shots = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: LineIn = serde_json::from_str(&line)?;
        if parsed.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema { found: parsed.schema_version, expected: SCHEMA_VERSION });
        }
        parsed.shot.check()?;
        shots.push(parsed.shot);
    }
    Ok(shots)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ShotRecord {
        ShotRecord {
            shot: 3,
            initial_state: InitialState::Minus,
            herald_ok: true,
            s: vec![[1, -1, 1, 1, 1, 1, -1, 1]; 2],
            aux_leak_flags: vec![0, 4],
            data_leak_flags: 0,
            final_data: [1, -1, 1, 1, 1, 1, 1, 1, -1],
        }
    }

    #[test]
    fn jsonl_round_trip() {
        let mut buf = Vec::new();
        write_jsonl(&mut buf, &[sample(), sample()]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("{\"schema_version\":1"));
        assert!(text.contains("\"-L\""));
        assert_eq!(read_jsonl(&buf[..]).unwrap(), vec![sample(), sample()]);
    }

    #[test]
    fn wrong_schema_is_rejected() {
        let mut buf = Vec::new();
        write_jsonl(&mut buf, &[sample()]).unwrap();
        let text = String::from_utf8(buf).unwrap().replace("\"schema_version\":1", "\"schema_version\":9");
        assert!(matches!(read_jsonl(text.as_bytes()), Err(Error::Schema { found: 9, .. })));
        let bad = String::from_utf8({
            let mut b = Vec::new();
            write_jsonl(&mut b, &[sample()]).unwrap();
            b
        })
        .unwrap()
        .replacen("-1", "2", 1);
        assert!(read_jsonl(bad.as_bytes()).is_err());
    }
}
