//! Compilation of the memory experiment into a flat list of frame operations
//! and execution of that list, either on a tableau (noiseless reference) or
//! as a sampled Pauli frame.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::code::{Basis, Surface17, NUM_DATA, NUM_QUBITS, NUM_STABILIZERS};
use crate::error::{Error, Result};
use crate::noise::{gate_channel, idle_channel, sample_leakage, DeviceParams, LeakageParams, LeakageTrace, PauliChannel};
use crate::sim::{Gate, Pauli, Tableau};

use super::InitialState;

const MASK: u64 = (1 << NUM_QUBITS) - 1;
const REFERENCE_SEED: u64 = 0x005E_ED0F_5EED;

fn threshold(p: f64) -> u64 {
    if p >= 1.0 {
        u64::MAX
    } else if p <= 0.0 {
        0
    } else {
        (p * 18_446_744_073_709_551_616.0) as u64
    }
}

/// Cumulative thresholds for a one-qubit Pauli channel (X, Y, Z).
#[derive(Clone, Copy, Debug)]
pub(crate) struct Sampler1 {
    cum: [u64; 3],
}

impl Sampler1 {
    fn new(ch: &PauliChannel) -> Option<Self> {
        let p = ch.probs();
        let cum = [threshold(p[1]), threshold(p[1] + p[2]), threshold(p[1] + p[2] + p[3])];
        (cum[2] > 0).then_some(Self { cum })
    }
}

#[derive(Clone, Debug)]
struct Sampler2 {
    cum: [u64; 15],
}

impl Sampler2 {
    fn new(ch: &PauliChannel) -> Option<Self> {
        let p = ch.probs();
        let mut cum = [0; 15];
        let mut acc = 0.0;
        for k in 1..16 {
            acc += p[k];
            cum[k - 1] = threshold(acc);
        }
        (cum[14] > 0).then_some(Self { cum })
    }
}

/// What a measurement record entry holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasureKind {
    Herald,
    /// Stabilizer index and 1-based cycle.
    Aux {
        stabilizer: u8,
        cycle: u32,
    },
    Data,
}

#[derive(Clone, Debug)]
pub(crate) enum Op {
    Gate { gate: Gate, a: u8, b: u8 },
    Noise1 { q: u8, s: Sampler1 },
    Noise2 { a: u8, b: u8, idx: u32 },
    Measure { q: u8, record: u32, flip: u64, kind: MeasureKind },
    CycleStart(u32),
}

/// A single fault for exhaustive injection studies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Pauli on register qubit `qubit` right after operation `after_op`.
    Pauli { after_op: usize, qubit: usize, pauli: Pauli },
    /// Reported outcome of measurement record `record` inverted.
    MeasurementFlip { record: usize },
}

/// Compiled experiment for one initial state and cycle count.
#[derive(Clone, Debug)]
pub struct Program {
    pub(crate) ops: Vec<Op>,
    samplers2: Vec<Sampler2>,
    reference: Vec<bool>,
    kinds: Vec<MeasureKind>,
    pub n_cycles: u32,
    pub state: InitialState,
    leakage: LeakageParams,
}

/// Record layout: 17 herald bits, 8 auxiliary bits per cycle, 9 data bits.
pub fn herald_record(q: usize) -> usize {
    q
}

pub fn aux_record(cycle: u32, stabilizer: usize) -> usize {
    NUM_QUBITS + (cycle as usize - 1) * NUM_STABILIZERS + stabilizer
}

pub fn data_record(n_cycles: u32, data: usize) -> usize {
    NUM_QUBITS + n_cycles as usize * NUM_STABILIZERS + data
}

struct Builder<'a> {
    dev: &'a DeviceParams,
    noisy: bool,
    ops: Vec<Op>,
    samplers2: Vec<Sampler2>,
    kinds: Vec<MeasureKind>,
    busy: [f64; NUM_QUBITS],
    readout_windows: Vec<(f64, f64)>,
}

impl<'a> Builder<'a> {
    fn push_noise1(&mut self, q: usize, ch: &PauliChannel) {
        if !self.noisy {
            return;
        }
        if let Some(s) = Sampler1::new(ch) {
            self.ops.push(Op::Noise1 { q: q as u8, s });
        }
    }

    fn push_noise2(&mut self, a: usize, b: usize, ch: &PauliChannel) {
        if !self.noisy {
            return;
        }
        if let Some(s) = Sampler2::new(ch) {
            self.samplers2.push(s);
            self.ops.push(Op::Noise2 { a: a as u8, b: b as u8, idx: self.samplers2.len() as u32 - 1 });
        }
    }

    /// Fills the idle gap of `q` up to `t`.
    fn touch(&mut self, q: usize, t: f64) -> Result<()> {
        let start = self.busy[q];
        if t < start - 1e-9 {
            return Err(Error::InvalidInput(format!("qubit {q} double-booked at {t} ns")));
        }
        let gap = t - start;
        if gap > 1e-9 {
            let p = &self.dev.qubits[q];
            let echo = q < NUM_DATA && self.readout_windows.iter().any(|&(a, b)| start < b && t > a);
            let t2 = if echo { p.t2_echo_us } else { p.t2_star_us };
            let ch = idle_channel(p.t1_us, t2, gap)?;
            self.push_noise1(q, &ch);
        }
        self.busy[q] = t;
        Ok(())
    }

    fn gate1(&mut self, gate: Gate, q: usize, t: f64) -> Result<()> {
        self.touch(q, t)?;
        self.ops.push(Op::Gate { gate, a: q as u8, b: q as u8 });
        let dt = self.dev.timing.gate_1q_ns;
        let p = &self.dev.qubits[q];
        let idle = idle_channel(p.t1_us, p.t2_star_us, dt)?;
        let residual = (p.eps_1q - idle.average_infidelity()).max(0.0);
        self.push_noise1(q, &idle.compose(&gate_channel(residual, 1)?));
        self.busy[q] = t + dt;
        Ok(())
    }

    /// Pauli gates are frame-invisible and virtual: no duration, no noise.
    fn virtual_pauli(&mut self, gate: Gate, q: usize) {
        self.ops.push(Op::Gate { gate, a: q as u8, b: q as u8 });
    }

    /// Echo pulse: contributes its gate error only; its sign is tracked in software.
    fn echo(&mut self, q: usize, t: f64) -> Result<()> {
        self.touch(q, t)?;
        let ch = gate_channel(self.dev.qubits[q].eps_1q, 1)?;
        self.push_noise1(q, &ch);
        Ok(())
    }

    fn cz(&mut self, aux: usize, data: usize, t: f64) -> Result<()> {
        self.touch(aux, t)?;
        self.touch(data, t)?;
        self.ops.push(Op::Gate { gate: Gate::Cz, a: aux as u8, b: data as u8 });
        let dt = self.dev.timing.cz_step_ns;
        let idle = |q: usize| -> Result<PauliChannel> {
            let p = &self.dev.qubits[q];
            idle_channel(p.t1_us, self.dev.t2_interaction(aux, data, q).min(2.0 * p.t1_us), dt)
        };
        let (ia, id) = (idle(aux)?, idle(data)?);
        let (PauliChannel::One(pa), PauliChannel::One(pd)) = (&ia, &id) else { unreachable!() };
        let coherent = PauliChannel::tensor(pa, pd);
        let residual = (self.dev.eps_2q(aux, data) - coherent.average_infidelity()).max(0.0);
        let ch = coherent.compose(&gate_channel(residual.min(0.8), 2)?);
        self.push_noise2(aux, data, &ch);
        self.busy[aux] = t + dt;
        self.busy[data] = t + dt;
        Ok(())
    }

    fn measure(&mut self, q: usize, t: f64, duration: f64, idle: bool, kind: MeasureKind) -> Result<()> {
        self.touch(q, t)?;
        if idle {
            let p = &self.dev.qubits[q];
            let ch = idle_channel(p.t1_us, p.t2_star_us, duration)?;
            self.push_noise1(q, &ch);
        }
        let flip = if self.noisy { threshold(self.dev.qubits[q].eps_ro2) } else { 0 };
        let record = self.kinds.len() as u32;
        self.kinds.push(kind);
        self.ops.push(Op::Measure { q: q as u8, record, flip, kind });
        self.busy[q] = t + duration;
        Ok(())
    }
}

impl Program {
    /// Compiles `n_cycles` cycles for `state` on `dev`; with `noisy = false`
    /// only gates and measurements are emitted.
    pub fn compile(code: &Surface17, dev: &DeviceParams, state: InitialState, n_cycles: u32, noisy: bool) -> Result<Program> {
        if n_cycles == 0 {
            return Err(Error::InvalidInput("at least one cycle is required".into()));
        }
        code.schedule.check(code)?;
        let tm = dev.timing.clone();
        let half = 2.0 * tm.gate_1q_ns + 4.0 * tm.cz_step_ns;
        if tm.cycle_ns + 1e-9 < 2.0 * half || tm.cycle_ns + 1e-9 < half + tm.aux_readout_ns {
            return Err(Error::Device(format!("cycle time {} ns is shorter than the gate sequence", tm.cycle_ns)));
        }
        let mut b = Builder {
            dev,
            noisy,
            ops: Vec::new(),
            samplers2: Vec::new(),
            kinds: Vec::new(),
            busy: [0.0; NUM_QUBITS],
            readout_windows: Vec::new(),
        };
        let aux_of = |stab: usize| NUM_DATA + stab;
        let z_aux: Vec<usize> = Basis::Z.stabilizers().map(aux_of).collect();
        let x_aux: Vec<usize> = Basis::X.stabilizers().map(aux_of).collect();

        // Thermal excitation, then the heralding readout.
        for q in 0..NUM_QUBITS {
            if noisy && dev.qubits[q].p_th > 0.0 {
                let p = dev.qubits[q].p_th;
                b.push_noise1(q, &PauliChannel::One([1.0 - p, p, 0.0, 0.0]));
            }
            b.measure(q, 0.0, tm.herald_readout_ns, false, MeasureKind::Herald)?;
        }

        // Data product-state preparation.
        let t_prep = tm.herald_readout_ns;
        for j in 0..NUM_DATA {
            match state {
                InitialState::Zero => {}
                InitialState::One => {
                    if code.logical_x.data_mask() >> j & 1 == 1 {
                        b.gate1(Gate::X, j, t_prep)?;
                    }
                }
                InitialState::Plus | InitialState::Minus => {
                    b.gate1(Gate::SqrtY, j, t_prep)?;
                    if state == InitialState::Minus && code.logical_z.data_mask() >> j & 1 == 1 {
                        b.virtual_pauli(Gate::Z, j);
                    }
                }
            }
        }
        let t_start = t_prep + tm.gate_1q_ns;

        let steps: Vec<Vec<(usize, usize)>> =
            code.schedule.steps.iter().map(|s| s.iter().map(|&(a, d)| (a.index(), d.index())).collect()).collect();

        for m in 1..=n_cycles {
            let t0 = t_start + (m - 1) as f64 * tm.cycle_ns;
            b.ops.push(Op::CycleStart(m));
            // Z half-cycle.
            for &a in &z_aux {
                b.gate1(Gate::SqrtY, a, t0)?;
            }
            for (k, step) in steps.iter().enumerate().take(4) {
                let t = t0 + tm.gate_1q_ns + k as f64 * tm.cz_step_ns;
                if k == 2 {
                    for j in 0..NUM_DATA {
                        b.echo(j, t)?;
                    }
                }
                for &(a, d) in step {
                    b.cz(a, d, t)?;
                }
            }
            for &a in &z_aux {
                b.gate1(Gate::SqrtYdg, a, t0 + half - tm.gate_1q_ns)?;
            }
            let tz = t0 + half;
            b.readout_windows.push((tz, tz + tm.aux_readout_ns));
            for (i, &a) in z_aux.iter().enumerate() {
                b.measure(a, tz, tm.aux_readout_ns, true, MeasureKind::Aux { stabilizer: i as u8, cycle: m })?;
            }
            // X half-cycle, concurrent with the Z readout.
            for j in 0..NUM_DATA {
                b.gate1(Gate::SqrtYdg, j, tz)?;
            }
            for &a in &x_aux {
                b.gate1(Gate::SqrtY, a, tz)?;
            }
            for (k, step) in steps.iter().enumerate().skip(4) {
                let t = tz + tm.gate_1q_ns + (k - 4) as f64 * tm.cz_step_ns;
                if k == 6 {
                    for j in 0..NUM_DATA {
                        b.echo(j, t)?;
                    }
                }
                for &(a, d) in step {
                    b.cz(a, d, t)?;
                }
            }
            let tr = tz + half - tm.gate_1q_ns;
            for j in 0..NUM_DATA {
                b.gate1(Gate::SqrtY, j, tr)?;
            }
            for &a in &x_aux {
                b.gate1(Gate::SqrtYdg, a, tr)?;
            }
            let tx = t0 + 2.0 * half;
            b.readout_windows.push((tx, tx + tm.aux_readout_ns));
            for (i, &a) in x_aux.iter().enumerate() {
                b.measure(a, tx, tm.aux_readout_ns, true, MeasureKind::Aux { stabilizer: 4 + i as u8, cycle: m })?;
            }
        }

        // Final data readout in the basis of the preserved logical operator.
        let mut tf = t_start + (n_cycles - 1) as f64 * tm.cycle_ns + 2.0 * half;
        if state.basis() == Basis::X {
            for j in 0..NUM_DATA {
                b.gate1(Gate::SqrtYdg, j, tf)?;
            }
            tf += tm.gate_1q_ns;
        }
        for j in 0..NUM_DATA {
            b.measure(j, tf, tm.data_readout_ns, false, MeasureKind::Data)?;
        }

        let mut program = Program {
            ops: b.ops,
            samplers2: b.samplers2,
            reference: Vec::new(),
            kinds: b.kinds,
            n_cycles,
            state,
            leakage: if noisy { dev.leakage.clone() } else { LeakageParams::none() },
        };
        program.reference = program.run_reference(REFERENCE_SEED)?;
        Ok(program)
    }

    /// One isolated measurement of stabilizer `stabilizer` on the basis-state
    /// input `input` of its support (bit `i` for the `i`-th supporting qubit;
    /// Z basis for Z-type, X basis for X-type plaquettes). Record 0 is the
    /// auxiliary readout.
    pub fn compile_stabilizer(
        code: &Surface17,
        dev: &DeviceParams,
        stabilizer: usize,
        input: u32,
        noisy: bool,
    ) -> Result<Program> {
        let spec = code.stabilizers.get(stabilizer).ok_or_else(|| Error::InvalidInput(format!("no stabilizer {stabilizer}")))?;
        let support: Vec<usize> = spec.support.iter().map(|q| q.index()).collect();
        if input >> support.len() != 0 {
            return Err(Error::InvalidInput(format!("input {input:#b} exceeds {} qubits", support.len())));
        }
        let tm = dev.timing.clone();
        let half = 2.0 * tm.gate_1q_ns + 4.0 * tm.cz_step_ns;
        let aux = spec.auxiliary.index();
        let x_type = spec.basis == Basis::X;
        let mut b = Builder {
            dev,
            noisy,
            ops: Vec::new(),
            samplers2: Vec::new(),
            kinds: Vec::new(),
            busy: [0.0; NUM_QUBITS],
            readout_windows: Vec::new(),
        };
        for (i, &j) in support.iter().enumerate() {
            if input >> i & 1 == 1 {
                b.gate1(Gate::X, j, 0.0)?;
            }
        }
        // X-type plaquettes take the inputs in the X basis.
        let mut t0 = tm.gate_1q_ns;
        if x_type {
            for &j in &support {
                b.gate1(Gate::SqrtY, j, t0)?;
            }
            t0 += tm.gate_1q_ns;
            for &j in &support {
                b.gate1(Gate::SqrtYdg, j, t0)?;
            }
        }
        b.gate1(Gate::SqrtY, aux, t0)?;
        let first = if x_type { 4 } else { 0 };
        for k in 0..4 {
            let t = t0 + tm.gate_1q_ns + k as f64 * tm.cz_step_ns;
            if k == 2 {
                for &j in &support {
                    b.echo(j, t)?;
                }
            }
            for &(a, d) in &code.schedule.steps[first + k] {
                if a.index() == aux {
                    b.cz(aux, d.index(), t)?;
                }
            }
        }
        let tr = t0 + half - tm.gate_1q_ns;
        if x_type {
            for &j in &support {
                b.gate1(Gate::SqrtY, j, tr)?;
            }
        }
        b.gate1(Gate::SqrtYdg, aux, tr)?;
        b.measure(aux, t0 + half, tm.aux_readout_ns, true, MeasureKind::Aux { stabilizer: stabilizer as u8, cycle: 1 })?;
        let mut program = Program {
            ops: b.ops,
            samplers2: b.samplers2,
            reference: Vec::new(),
            kinds: b.kinds,
            n_cycles: 1,
            state: InitialState::Zero,
            leakage: LeakageParams::none(),
        };
        program.reference = program.run_reference(REFERENCE_SEED)?;
        Ok(program)
    }

    pub fn num_ops(&self) -> usize {
        self.ops.len()
    }

    pub fn num_measurements(&self) -> usize {
        self.kinds.len()
    }

    pub fn measurement_kinds(&self) -> &[MeasureKind] {
        &self.kinds
    }

    /// Index of the marker operation that opens cycle `m`.
    pub fn cycle_start_op(&self, m: u32) -> Option<usize> {
        self.ops.iter().position(|op| matches!(op, Op::CycleStart(c) if *c == m))
    }

    /// Register qubits touched by operation `k` (empty for markers).
    pub fn op_qubits(&self, k: usize) -> Vec<usize> {
        match &self.ops[k] {
            Op::Gate { gate, a, b } if gate.arity() == 2 => vec![*a as usize, *b as usize],
            Op::Gate { a, .. } => vec![*a as usize],
            Op::Noise1 { q, .. } | Op::Measure { q, .. } => vec![*q as usize],
            Op::Noise2 { a, b, .. } => vec![*a as usize, *b as usize],
            Op::CycleStart(_) => Vec::new(),
        }
    }

    /// Noiseless execution on a tableau; random outcomes are drawn from a
    /// fixed stream.
    fn run_reference(&self, seed: u64) -> Result<Vec<bool>> {
        let mut t = Tableau::new(NUM_QUBITS);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = vec![false; self.kinds.len()];
        for op in &self.ops {
            match *op {
                Op::Gate { gate, a, b } => {
                    if gate.arity() == 2 {
                        t.apply(gate, &[a as usize, b as usize])?;
                    } else {
                        t.apply(gate, &[a as usize])?;
                    }
                }
                Op::Measure { q, record, .. } => {
                    out[record as usize] = t.measure_z(q as usize, &mut rng)? < 0;
                }
                _ => {}
            }
        }
        Ok(out)
    }

    /// Executes the program on a tableau, applying `fault` exactly. Used by
    /// tests to cross-check the frame runner.
    pub fn run_tableau(&self, seed: u64, fault: Option<Fault>) -> Result<Vec<bool>> {
        let mut t = Tableau::new(NUM_QUBITS);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = vec![false; self.kinds.len()];
        for (k, op) in self.ops.iter().enumerate() {
            match *op {
                Op::Gate { gate, a, b } => {
                    if gate.arity() == 2 {
                        t.apply(gate, &[a as usize, b as usize])?;
                    } else {
                        t.apply(gate, &[a as usize])?;
                    }
                }
                Op::Measure { q, record, .. } => {
                    let mut bit = t.measure_z(q as usize, &mut rng)? < 0;
                    if fault == Some(Fault::MeasurementFlip { record: record as usize }) {
                        bit = !bit;
                    }
                    out[record as usize] = bit;
                }
                _ => {}
            }
            if let Some(Fault::Pauli { after_op, qubit, pauli }) = fault {
                if after_op == k {
                    t.apply_pauli(&crate::sim::PauliString::single(NUM_QUBITS, qubit, pauli))?;
                }
            }
        }
        Ok(out)
    }

    /// Samples one shot's raw measurement record and its leakage trace.
    pub fn sample<R: RngCore>(&self, rng: &mut R, fault: Option<Fault>) -> (Vec<bool>, LeakageTrace) {
        let (out, leak, _, _) = self.execute(rng, fault, false);
        (out, leak)
    }

    /// Samples a shot up to the final data readout and returns the records
    /// taken so far together with the data-qubit Pauli frame `(x, z)` at
    /// that point.
    pub fn sample_data_frame<R: RngCore>(&self, rng: &mut R) -> (Vec<bool>, LeakageTrace, u64, u64) {
        let (out, leak, x, z) = self.execute(rng, None, true);
        let data = (1 << NUM_DATA) - 1;
        (out, leak, x & data, z & data)
    }

    /// Noiseless state just before the final data readout, consistent with
    /// the reference outcomes.
    pub fn reference_tableau(&self) -> Result<Tableau> {
        let mut t = Tableau::new(NUM_QUBITS);
        let mut rng = ChaCha8Rng::seed_from_u64(REFERENCE_SEED);
        for op in &self.ops {
            match *op {
                Op::Gate { gate, a, b } => {
                    if gate.arity() == 2 {
                        t.apply(gate, &[a as usize, b as usize])?;
                    } else {
                        t.apply(gate, &[a as usize])?;
                    }
                }
                Op::Measure { kind: MeasureKind::Data, .. } => break,
                Op::Measure { q, .. } => {
                    t.measure_z(q as usize, &mut rng)?;
                }
                _ => {}
            }
        }
        Ok(t)
    }

    fn execute<R: RngCore>(&self, rng: &mut R, fault: Option<Fault>, stop_at_data: bool) -> (Vec<bool>, LeakageTrace, u64, u64) {
        let leak = sample_leakage(&self.leakage, self.n_cycles, rng);
        let any_leak = leak.leaked_at.iter().any(Option::is_some);
        let mut out = vec![false; self.kinds.len()];
        let mut x: u64 = 0;
        let mut z: u64 = rng.next_u64() & MASK;
        for (k, op) in self.ops.iter().enumerate() {
            match *op {
                Op::Gate { gate, a, b } => {
                    let (a, b) = (a as u32, b as u32);
                    match gate {
                        Gate::H | Gate::SqrtY | Gate::SqrtYdg => {
                            let d = ((x ^ z) >> a) & 1;
                            x ^= d << a;
                            z ^= d << a;
                        }
                        Gate::S | Gate::Sdg => z ^= x & (1 << a),
                        Gate::X | Gate::Y | Gate::Z => {}
                        Gate::Cz => {
                            z ^= ((x >> b & 1) << a) | ((x >> a & 1) << b);
                        }
                        Gate::Cx => {
                            x ^= (x >> a & 1) << b;
                            z ^= (z >> b & 1) << a;
                        }
                    }
                }
                Op::Noise1 { q, s } => {
                    let r = rng.next_u64();
                    if r < s.cum[2] {
                        let label = if r < s.cum[0] {
                            1
                        } else if r < s.cum[1] {
                            2
                        } else {
                            3
                        };
                        apply_label(&mut x, &mut z, q as u32, label);
                    }
                }
                Op::Noise2 { a, b, idx } => {
                    let s = &self.samplers2[idx as usize];
                    let r = rng.next_u64();
                    if r < s.cum[14] {
                        let label = s.cum.iter().position(|&c| r < c).unwrap() + 1;
                        apply_label(&mut x, &mut z, a as u32, label / 4);
                        apply_label(&mut x, &mut z, b as u32, label % 4);
                    }
                }
                Op::Measure { q, record, flip, kind } => {
                    if stop_at_data && kind == MeasureKind::Data {
                        break;
                    }
                    let q = q as u32;
                    let mut bit = self.reference[record as usize] ^ (x >> q & 1 == 1);
                    if flip > 0 && rng.next_u64() < flip {
                        bit = !bit;
                    }
                    if any_leak {
                        let leaked = match kind {
                            MeasureKind::Aux { cycle, .. } => leak.is_leaked(q as usize, cycle),
                            MeasureKind::Data => leak.leaked_at[q as usize].is_some(),
                            MeasureKind::Herald => false,
                        };
                        if leaked {
                            bit = rng.random();
                        }
                    }
                    if fault == Some(Fault::MeasurementFlip { record: record as usize }) {
                        bit = !bit;
                    }
                    out[record as usize] = bit;
                    z = (z & !(1 << q)) | ((rng.next_u64() & 1) << q);
                }
                Op::CycleStart(m) => {
                    if any_leak {
                        for j in 0..NUM_DATA {
                            if leak.is_leaked(j, m) {
                                let r = rng.next_u64();
                                x = (x & !(1 << j)) | ((r & 1) << j);
                                z = (z & !(1 << j)) | ((r >> 1 & 1) << j);
                            }
                        }
                    }
                }
            }
            if let Some(Fault::Pauli { after_op, qubit, pauli }) = fault {
                if after_op == k {
                    let (px, pz) = pauli.bits();
                    x ^= (px as u64) << qubit;
                    z ^= (pz as u64) << qubit;
                }
            }
        }
        (out, leak, x, z)
    }
}

#[inline]
fn apply_label(x: &mut u64, z: &mut u64, q: u32, label: usize) {
    // I=0, X=1, Y=2, Z=3
    let xb = (label == 1 || label == 2) as u64;
    let zb = (label >= 2) as u64;
    *x ^= xb << q;
    *z ^= zb << q;
}
