//! Logical-state fidelity from the 512 correlators of the `|0⟩_L` projector,
//! and the correctable-subspace fidelity built on top of it.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::code::{Basis, Surface17, NUM_DATA, NUM_STABILIZERS};
use crate::error::{Error, Result};
use crate::experiment::{aux_record, herald_record, shot_seed, InitialState, Program};
use crate::noise::DeviceParams;
use crate::seed::derive_seed;
use crate::sim::{Pauli, PauliString, Tableau};

/// Terms of the target projector: every product of a stabilizer subset
/// (bits 0..8) with or without `Z_L` (bit 8).
pub const NUM_TERMS: usize = 512;
/// Terms without `Z_L`: the code-space projector.
pub const NUM_CODE_TERMS: usize = 256;

/// Term `j` of the projector on an `n`-qubit register whose first nine
/// qubits are the data qubits, with the sign produced by the product.
pub fn term_pauli(code: &Surface17, j: usize, n: usize) -> PauliString {
    let mut p = PauliString::identity(n);
    for (k, s) in code.stabilizers.iter().enumerate() {
        if j >> k & 1 == 1 {
            let qs: Vec<usize> = s.support.iter().map(|q| q.index()).collect();
            p = p * PauliString::uniform(n, &qs, s.basis.pauli());
        }
    }
    if j >> NUM_STABILIZERS & 1 == 1 {
        let qs: Vec<usize> = code.logical_z.support.iter().map(|q| q.index()).collect();
        p = p * PauliString::uniform(n, &qs, Pauli::Z);
    }
    p
}

/// Sign `γ_j` of term `j` for X-stabilizer values `x_signs` (Z stabilizers
/// and `Z_L` are `+1` for `|0⟩_L`).
pub fn gamma(j: usize, x_signs: [i8; 4]) -> i8 {
    (0..4).filter(|i| j >> (4 + i) & 1 == 1).map(|i| x_signs[i]).product()
}

/// `⟨γ_j P_j⟩` of a stabilizer state, exactly.
pub fn correlators_from_tableau(code: &Surface17, t: &Tableau, x_signs: [i8; 4]) -> Result<Vec<f64>> {
    let n = t.num_qubits();
    if n < NUM_DATA {
        return Err(Error::SizeMismatch { expected: NUM_DATA, got: n });
    }
    (0..NUM_TERMS).map(|j| Ok((gamma(j, x_signs) * t.expectation(&term_pauli(code, j, n))?) as f64)).collect()
}

fn check_len(corr: &[f64]) -> Result<()> {
    if corr.len() == NUM_TERMS {
        Ok(())
    } else {
        Err(Error::SizeMismatch { expected: NUM_TERMS, got: corr.len() })
    }
}

/// `F_phys = (1/512) Σ_j ⟨γ_j P_j⟩`.
pub fn fidelity_physical(corr: &[f64]) -> Result<f64> {
    check_len(corr)?;
    Ok(corr.iter().sum::<f64>() / NUM_TERMS as f64)
}

/// Probability of the state lying in the code space, `(1/256) Σ` over the
/// stabilizer-only terms.
pub fn logical_subspace_probability(corr: &[f64]) -> Result<f64> {
    check_len(corr)?;
    Ok(corr[..NUM_CODE_TERMS].iter().sum::<f64>() / NUM_CODE_TERMS as f64)
}

/// Divides each correlator by `∏ (1 - 2 ε_q)` over the qubits of its term.
pub fn mitigate_readout(code: &Surface17, corr: &[f64], eps: &[f64; NUM_DATA]) -> Result<Vec<f64>> {
    check_len(corr)?;
    if let Some(e) = eps.iter().find(|&&e| !(0.0..0.5).contains(&e)) {
        return Err(Error::InvalidInput(format!("readout error {e} outside [0, 0.5)")));
    }
    Ok(corr
        .iter()
        .enumerate()
        .map(|(j, &c)| {
            let support = term_pauli(code, j, NUM_DATA).support();
            let factor: f64 = (0..NUM_DATA).filter(|q| support >> q & 1 == 1).map(|q| 1.0 - 2.0 * eps[q]).product();
            c / factor
        })
        .collect())
}

/// Label of the state `E|0⟩_L`: bit `k < 8` when `E` anticommutes with
/// stabilizer `k`, bit 8 when it anticommutes with `Z_L`.
fn label(code: &Surface17, x: u64, z: u64) -> usize {
    let odd = |v: u64| v.count_ones() & 1 == 1;
    let mut l = 0;
    for (k, s) in code.stabilizers.iter().enumerate() {
        let m = s.data_mask();
        let anti = match s.basis {
            Basis::Z => odd(x & m),
            Basis::X => odd(z & m),
        };
        l |= (anti as usize) << k;
    }
    l | (odd(x & code.logical_z.data_mask()) as usize) << NUM_STABILIZERS
}

/// Minimal weight, number of minimal-weight errors and one such error for
/// each of the 512 labels, by exhaustive search over the `4^9` data Paulis.
#[derive(Clone, Debug)]
struct ErrorTable {
    weight: Vec<u32>,
    count: Vec<u32>,
    error: Vec<(u64, u64)>,
}

fn error_table(code: &Surface17) -> &'static ErrorTable {
    static TABLE: OnceLock<ErrorTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = ErrorTable { weight: vec![u32::MAX; NUM_TERMS], count: vec![0; NUM_TERMS], error: vec![(0, 0); NUM_TERMS] };
        for x in 0..1u64 << NUM_DATA {
            for z in 0..1u64 << NUM_DATA {
                let w = (x | z).count_ones();
                let l = label(code, x, z);
                if w < t.weight[l] {
                    t.weight[l] = w;
                    t.count[l] = 1;
                    t.error[l] = (x, z);
                } else if w == t.weight[l] {
                    t.count[l] += 1;
                }
            }
        }
        t
    })
}

/// One member of a correctable subspace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubspaceState {
    /// Stabilizer syndrome, bit `k` for stabilizer `k`.
    pub syndrome: u8,
    /// Whether the state is the `Z_L = -1` member of its syndrome pair.
    pub flipped: bool,
    /// Minimal weight of an error reaching it from `|0⟩_L`.
    pub weight: u32,
    /// A minimal-weight reaching error on the data qubits.
    pub error: String,
}

impl SubspaceState {
    fn label(&self) -> usize {
        self.syndrome as usize | (self.flipped as usize) << NUM_STABILIZERS
    }
}

/// One eigenstate per syndrome, 256 in total.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrectableSubspace {
    pub seed: u64,
    pub states: Vec<SubspaceState>,
}

impl CorrectableSubspace {
    /// Checks that `|0⟩_L` and the image of every single-qubit error are
    /// members and that each syndrome appears once.
    pub fn check(&self, code: &Surface17) -> Result<()> {
        let fail = |msg: String| Err(Error::Degenerate(msg));
        if self.states.len() != 256 {
            return fail(format!("{} states instead of 256", self.states.len()));
        }
        if self.states.iter().enumerate().any(|(s, st)| st.syndrome as usize != s) {
            return fail("syndromes out of order".into());
        }
        let chosen: Vec<usize> = self.states.iter().map(SubspaceState::label).collect();
        if chosen[0] != 0 {
            return fail("|0>_L is missing".into());
        }
        for q in 0..NUM_DATA {
            for p in Pauli::NON_IDENTITY {
                let (x, z) = p.bits();
                let l = label(code, (x as u64) << q, (z as u64) << q);
                if chosen[l & 0xFF] != l {
                    return fail(format!("image of {p:?} on D{} is missing", q + 1));
                }
            }
        }
        Ok(())
    }
}

/// Chooses, for every syndrome, the eigenstate reachable with the lower
/// error weight, then the one reachable by more minimal-weight errors, then
/// at random.
pub fn build_correctable_subspace(code: &Surface17, seed: u64) -> CorrectableSubspace {
    let table = error_table(code);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states = (0..256usize)
        .map(|s| {
            let (a, b) = (s, s | 1 << NUM_STABILIZERS);
            let pick_b = if table.weight[a] != table.weight[b] {
                table.weight[b] < table.weight[a]
            } else if table.count[a] != table.count[b] {
                table.count[b] > table.count[a]
            } else {
                rng.random::<bool>()
            };
            let l = if pick_b { b } else { a };
            let (x, z) = table.error[l];
            SubspaceState {
                syndrome: s as u8,
                flipped: pick_b,
                weight: table.weight[l],
                error: PauliString::from_masks(NUM_DATA, x, z).unsigned().to_string(),
            }
        })
        .collect();
    CorrectableSubspace { seed, states }
}

/// Fidelity figures of one state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub paper_metric: String,
    pub f_phys: f64,
    pub p_l: f64,
    pub f_l: f64,
    /// Mean correctable-subspace fidelity over the sampled subspaces.
    pub f_c: f64,
    pub f_c_std: f64,
    /// `F_w[i - 1]`: contribution of the states at error weight `i = 1..=4`.
    pub f_w: [f64; 4],
    pub subspaces: usize,
}

/// Fidelity with state `label` (`E|0⟩_L`): each term re-signed by whether
/// it anticommutes with `E`.
fn state_fidelity(corr: &[f64], label: usize) -> f64 {
    corr.iter().enumerate().map(|(j, &c)| if (j & label).count_ones() & 1 == 1 { -c } else { c }).sum::<f64>() / NUM_TERMS as f64
}

/// `F_phys`, `P_L`, `F_L` and the correctable-subspace fidelity averaged over
/// `subspaces` seeded subspaces.
pub fn fidelity_correctable(code: &Surface17, corr: &[f64], subspaces: usize, seed: u64) -> Result<FidelityReport> {
    check_len(corr)?;
    if subspaces == 0 {
        return Err(Error::InvalidInput("at least one subspace is required".into()));
    }
    let f_phys = fidelity_physical(corr)?;
    let p_l = logical_subspace_probability(corr)?;
    let per_state: Vec<f64> = (0..NUM_TERMS).map(|l| state_fidelity(corr, l)).collect();
    let runs: Vec<[f64; 4]> = (0..subspaces)
        .into_par_iter()
        .map(|i| {
            let sub = build_correctable_subspace(code, derive_seed(seed, &format!("subspace/{i}")));
            let mut w = [0.0; 4];
            for st in sub.states.iter().filter(|s| s.weight > 0) {
                w[st.weight as usize - 1] += per_state[st.label()];
            }
            w
        })
        .collect();
    let k = subspaces as f64;
    let mut f_w = [0.0; 4];
    for r in &runs {
        for i in 0..4 {
            f_w[i] += r[i] / k;
        }
    }
    let totals: Vec<f64> = runs.iter().map(|r| f_phys + r.iter().sum::<f64>()).collect();
    let f_c = f_phys + f_w.iter().sum::<f64>();
    let f_c_std = (totals.iter().map(|t| (t - f_c).powi(2)).sum::<f64>() / k).sqrt();
    Ok(FidelityReport {
        paper_metric: "logical_state_fidelity".into(),
        f_phys,
        p_l,
        f_l: if p_l > 0.0 { f_phys / p_l } else { f64::NAN },
        f_c,
        f_c_std,
        f_w,
        subspaces,
    })
}

/// Correlators of `|0⟩_L` prepared by one noisy cycle on `device`, estimated
/// from `shots` heralded, leakage-free shots. Each shot contributes one
/// single-shot outcome per term; `readout` adds independent misclassification
/// of the tomography readout on each data qubit.
pub fn simulate_tomography(
    code: &Surface17,
    device: &DeviceParams,
    shots: u64,
    seed: u64,
    readout: Option<[f64; NUM_DATA]>,
) -> Result<Vec<f64>> {
    if shots == 0 {
        return Err(Error::InvalidInput("shots must be at least 1".into()));
    }
    let program = Program::compile(code, device, InitialState::Zero, 1, true)?;
    let reference = program.reference_tableau()?;
    let ref_values: Vec<i8> =
        (0..NUM_TERMS).map(|j| reference.expectation(&term_pauli(code, j, reference.num_qubits()))).collect::<Result<_>>()?;
    let terms: Vec<(u64, u64)> = (0..NUM_TERMS)
        .map(|j| {
            let p = term_pauli(code, j, NUM_DATA);
            (p.x_mask(), p.z_mask())
        })
        .collect();
    let flips: Vec<u64> = readout.unwrap_or([0.0; NUM_DATA]).iter().map(|&e| (e * 2f64.powi(64)) as u64).collect();
    let (sum, kept) = (0..shots)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(shot_seed(seed, i));
            let (raw, leak, x, z) = program.sample_data_frame(&mut rng);
            let heralded = (0..crate::code::NUM_QUBITS).all(|q| !raw[herald_record(q)]);
            if !heralded || leak.any_aux_flag() || leak.any_data_flag() {
                return (vec![0.0; NUM_TERMS], 0u64);
            }
            let mut x_signs = [1i8; 4];
            for (i, s) in x_signs.iter_mut().enumerate() {
                if raw[aux_record(1, 4 + i)] {
                    *s = -1;
                }
            }
            let row: Vec<f64> = (0..NUM_TERMS)
                .map(|j| {
                    let (px, pz) = terms[j];
                    let anti = ((x & pz).count_ones() + (z & px).count_ones()) & 1 == 1;
                    let mut v = gamma(j, x_signs) * ref_values[j];
                    if anti {
                        v = -v;
                    }
                    let support = px | pz;
                    let mut flipped = false;
                    for (q, &f) in flips.iter().enumerate() {
                        if support >> q & 1 == 1 && f > 0 && rng.random::<u64>() < f {
                            flipped = !flipped;
                        }
                    }
                    if flipped {
                        -(v as f64)
                    } else {
                        v as f64
                    }
                })
                .collect();
            (row, 1)
        })
        .reduce(
            || (vec![0.0; NUM_TERMS], 0),
            |mut a, b| {
                a.0.iter_mut().zip(&b.0).for_each(|(s, v)| *s += v);
                (a.0, a.1 + b.1)
            },
        );
    if kept == 0 {
        return Err(Error::InsufficientData("no heralded, leakage-free shots".into()));
    }
    Ok(sum.into_iter().map(|s| s / kept as f64).collect())
}
