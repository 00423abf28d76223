use rand::Rng;

use crate::error::{Error, Result};

/// Stochastic Pauli channel on one or two qubits.
///
/// Probabilities are indexed by Pauli label `I, X, Y, Z` (`0..4`); for two
/// qubits the index is `4·a + b` with `a` acting on the first qubit.
#[derive(Clone, Debug, PartialEq)]
pub enum PauliChannel {
    One([f64; 4]),
    Two([f64; 16]),
}

impl PauliChannel {
    pub fn identity(arity: usize) -> Self {
        match arity {
            1 => PauliChannel::One([1.0, 0.0, 0.0, 0.0]),
            _ => {
                let mut p = [0.0; 16];
                p[0] = 1.0;
                PauliChannel::Two(p)
            }
        }
    }

    pub fn probs(&self) -> &[f64] {
        match self {
            PauliChannel::One(p) => p,
            PauliChannel::Two(p) => p,
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            PauliChannel::One(_) => 1,
            PauliChannel::Two(_) => 2,
        }
    }

    /// Probability of any non-identity Pauli.
    pub fn error_probability(&self) -> f64 {
        self.probs()[1..].iter().sum()
    }

    /// Average gate infidelity `1 − F_avg` with `F_avg = (d·p_I + 1)/(d + 1)`.
    pub fn average_infidelity(&self) -> f64 {
        let d = (1usize << self.arity()) as f64;
        d * (1.0 - self.probs()[0]) / (d + 1.0)
    }

    /// Pauli transfer eigenvalue of label `k`: `Σ_j p_j (−1)^{⟨j,k⟩}`.
    pub fn transfer_eigenvalue(&self, k: usize) -> f64 {
        let anticommutes = |a: usize, b: usize| a != 0 && b != 0 && a != b;
        let ac = |j: usize| match self {
            PauliChannel::One(_) => anticommutes(j, k),
            PauliChannel::Two(_) => anticommutes(j / 4, k / 4) ^ anticommutes(j % 4, k % 4),
        };
        self.probs().iter().enumerate().map(|(j, &p)| if ac(j) { -p } else { p }).sum()
    }

    /// Sequential application of two channels of the same arity.
    pub fn compose(&self, other: &Self) -> Self {
        // With labels I=0, X=1, Y=2, Z=3 the Pauli product is XOR up to phase.
        let prod = |a: usize, b: usize| a ^ b;
        match (self, other) {
            (PauliChannel::One(a), PauliChannel::One(b)) => {
                let mut out = [0.0; 4];
                for i in 0..4 {
                    for j in 0..4 {
                        out[prod(i, j)] += a[i] * b[j];
                    }
                }
                PauliChannel::One(out)
            }
            (PauliChannel::Two(a), PauliChannel::Two(b)) => {
                let mut out = [0.0; 16];
                for i in 0..16 {
                    for j in 0..16 {
                        out[4 * prod(i / 4, j / 4) + prod(i % 4, j % 4)] += a[i] * b[j];
                    }
                }
                PauliChannel::Two(out)
            }
            _ => panic!("cannot compose channels of different arity"),
        }
    }

    /// Independent channels on two qubits as one two-qubit channel.
    pub fn tensor(a: &[f64; 4], b: &[f64; 4]) -> Self {
        let mut out = [0.0; 16];
        for i in 0..4 {
            for j in 0..4 {
                out[4 * i + j] = a[i] * b[j];
            }
        }
        PauliChannel::Two(out)
    }

    /// Draws a Pauli label.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let mut u: f64 = rng.random();
        let probs = self.probs();
        for (k, &p) in probs.iter().enumerate().skip(1) {
            if u < p {
                return k;
            }
            u -= p;
        }
        0
    }
}

/// Pauli twirl of combined amplitude damping and dephasing over `dt_ns`.
///
/// The twirled channel has transfer eigenvalues `λ_X = λ_Y = e^{−t/T2}` and
/// `λ_Z = e^{−t/T1}`, hence
/// `p_X = p_Y = (1 − e^{−t/T1})/4` and
/// `p_Z = (1 − e^{−t/T2})/2 − (1 − e^{−t/T1})/4`, clamped at 0.
pub fn idle_channel(t1_us: f64, t2_us: f64, dt_ns: f64) -> Result<PauliChannel> {
    if !(t1_us > 0.0 && t2_us > 0.0) {
        return Err(Error::Device(format!("non-positive coherence time T1={t1_us} T2={t2_us}")));
    }
    if dt_ns.is_nan() || dt_ns < 0.0 {
        return Err(Error::InvalidInput(format!("negative duration {dt_ns} ns")));
    }
    let t = dt_ns * 1e-3;
    let relax = -(-t / t1_us).exp_m1();
    let pxy = relax / 4.0;
    let pz = (-(-t / t2_us).exp_m1() / 2.0 - pxy).max(0.0);
    Ok(PauliChannel::One([1.0 - 2.0 * pxy - pz, pxy, pxy, pz]))
}

/// Uniform depolarizing channel whose average gate infidelity equals `eps`.
///
/// With `d = 2^arity`, the non-identity mass is `eps·(d + 1)/d`, split evenly
/// over the `d² − 1` non-identity Paulis.
pub fn gate_channel(eps: f64, arity: usize) -> Result<PauliChannel> {
    let d = match arity {
        1 => 2.0,
        2 => 4.0,
        _ => return Err(Error::InvalidInput(format!("arity {arity} not supported"))),
    };
    // Non-identity mass may not exceed 1.
    let max = d / (d + 1.0);
    if !(0.0..=max).contains(&eps) {
        return Err(Error::InvalidInput(format!("gate error {eps} out of range [0, {max}]")));
    }
    let mass = eps * (d + 1.0) / d;
    let each = mass / (d * d - 1.0);
    Ok(match arity {
        1 => PauliChannel::One([1.0 - mass, each, each, each]),
        _ => {
            let mut p = [each; 16];
            p[0] = 1.0 - mass;
            PauliChannel::Two(p)
        }
    })
}

/// Symmetric readout misclassification of a `±1` outcome.
pub fn sample_readout<R: Rng + ?Sized>(outcome: i8, eps_ro: f64, rng: &mut R) -> i8 {
    if eps_ro > 0.0 && rng.random::<f64>() < eps_ro {
        -outcome
    } else {
        outcome
    }
}
