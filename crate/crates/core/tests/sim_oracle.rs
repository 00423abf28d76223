//! Tableau and frame simulators checked against a dense state-vector oracle.

use num_complex::Complex64 as C;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use surface17::sim::{Gate, Pauli, PauliFrame, PauliString, Tableau};

struct Dense {
    n: usize,
    amp: Vec<C>,
}

impl Dense {
    fn new(n: usize) -> Self {
        let mut amp = vec![C::new(0.0, 0.0); 1 << n];
        amp[0] = C::new(1.0, 0.0);
        Self { n, amp }
    }

    fn apply_1q(&mut self, q: usize, m: [[C; 2]; 2]) {
        let bit = 1 << q;
        for i in 0..self.amp.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amp[i], self.amp[i | bit]);
                self.amp[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amp[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    fn apply(&mut self, gate: Gate, t: &[usize]) {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let c = |re: f64, im: f64| C::new(re, im);
        let o = c(0.0, 0.0);
        match gate {
            Gate::H => self.apply_1q(t[0], [[c(r, 0.0), c(r, 0.0)], [c(r, 0.0), c(-r, 0.0)]]),
            Gate::S => self.apply_1q(t[0], [[c(1.0, 0.0), o], [o, c(0.0, 1.0)]]),
            Gate::Sdg => self.apply_1q(t[0], [[c(1.0, 0.0), o], [o, c(0.0, -1.0)]]),
            Gate::SqrtY => self.apply_1q(t[0], [[c(r, 0.0), c(-r, 0.0)], [c(r, 0.0), c(r, 0.0)]]),
            Gate::SqrtYdg => self.apply_1q(t[0], [[c(r, 0.0), c(r, 0.0)], [c(-r, 0.0), c(r, 0.0)]]),
            Gate::X => self.apply_1q(t[0], [[o, c(1.0, 0.0)], [c(1.0, 0.0), o]]),
            Gate::Y => self.apply_1q(t[0], [[o, c(0.0, -1.0)], [c(0.0, 1.0), o]]),
            Gate::Z => self.apply_1q(t[0], [[c(1.0, 0.0), o], [o, c(-1.0, 0.0)]]),
            Gate::Cz => {
                let m = 1 << t[0] | 1 << t[1];
                for (i, a) in self.amp.iter_mut().enumerate() {
                    if i & m == m {
                        *a = -*a;
                    }
                }
            }
            Gate::Cx => {
                let (cb, tb) = (1 << t[0], 1 << t[1]);
                for i in 0..self.amp.len() {
                    if i & cb != 0 && i & tb == 0 {
                        self.amp.swap(i, i | tb);
                    }
                }
            }
        }
    }

    fn prob_one(&self, q: usize) -> f64 {
        self.amp.iter().enumerate().filter(|(i, _)| i >> q & 1 == 1).map(|(_, a)| a.norm_sqr()).sum()
    }

    fn project(&mut self, q: usize, one: bool) {
        for (i, a) in self.amp.iter_mut().enumerate() {
            if (i >> q & 1 == 1) != one {
                *a = C::new(0.0, 0.0);
            }
        }
        let norm: f64 = self.amp.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut self.amp {
            *a /= norm;
        }
    }

    fn expectation(&self, p: &PauliString) -> f64 {
        let i_pow = [C::new(1.0, 0.0), C::new(0.0, 1.0), C::new(-1.0, 0.0), C::new(0.0, -1.0)];
        let pre = i_pow[p.phase() as usize];
        let mut acc = C::new(0.0, 0.0);
        for (b, a) in self.amp.iter().enumerate() {
            let b = b as u64;
            let sign = if (p.z_mask() & b).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            let target = (b ^ p.x_mask()) as usize;
            acc += self.amp[target].conj() * pre * sign * *a;
        }
        assert!(acc.im.abs() < 1e-9);
        let _ = self.n;
        acc.re
    }
}

#[derive(Clone, Debug)]
enum Op {
    Gate(Gate, usize, usize),
    Measure(usize, bool),
}

fn circuit(n: usize) -> impl Strategy<Value = Vec<Op>> {
    let op = (0..11usize, 0..n, 0..n, any::<bool>()).prop_map(move |(g, a, b, bit)| {
        if g == 10 {
            Op::Measure(a, bit)
        } else {
            Op::Gate(Gate::ALL[g], a, b)
        }
    });
    prop::collection::vec(op, 0..40)
}

fn all_paulis(n: usize) -> impl Iterator<Item = PauliString> {
    (0..1u64 << (2 * n)).map(move |k| PauliString::from_masks(n, k & ((1 << n) - 1), k >> n))
}

fn run_case(n: usize, ops: &[Op]) -> Result<(), TestCaseError> {
    let mut t = Tableau::new(n);
    let mut d = Dense::new(n);
    for op in ops {
        match *op {
            Op::Gate(g, a, b) => {
                if g.arity() == 2 && a == b {
                    continue;
                }
                t.apply(g, &[a, b][..g.arity()]).unwrap();
                d.apply(g, &[a, b][..g.arity()]);
            }
            Op::Measure(q, one) => {
                let p1 = d.prob_one(q);
                if t.is_deterministic_z(q).unwrap() {
                    let mut rng = ChaCha8Rng::seed_from_u64(0);
                    let v = t.measure_z(q, &mut rng).unwrap();
                    let expected = if v < 0 { 1.0 } else { 0.0 };
                    prop_assert!((p1 - expected).abs() < 1e-9, "p1={p1} v={v}");
                } else {
                    prop_assert!((p1 - 0.5).abs() < 1e-9, "p1={p1}");
                    let value = if one { -1 } else { 1 };
                    prop_assert!(t.project_z(q, value).unwrap());
                    d.project(q, one);
                }
            }
        }
    }
    for p in all_paulis(n) {
        let dense = d.expectation(&p);
        let exact = t.expectation(&p).unwrap() as f64;
        prop_assert!((dense - exact).abs() < 1e-9, "{p}: dense {dense} tableau {exact}");
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn tableau_agrees_with_state_vector(
        (n, ops) in (1usize..=5).prop_flat_map(|n| (Just(n), circuit(n)))
    ) {
        run_case(n, &ops)?;
    }
}

fn pauli_string(n: usize) -> impl Strategy<Value = PauliString> {
    (any::<u64>(), any::<u64>(), 0u32..4).prop_map(move |(x, z, k)| {
        let mut p = PauliString::from_masks(n, x, z);
        for _ in 0..k {
            p = p * PauliString::identity(n).negate();
        }
        p
    })
}

proptest! {
    #[test]
    fn pauli_product_is_associative(a in pauli_string(7), b in pauli_string(7), c in pauli_string(7)) {
        prop_assert_eq!((a * b) * c, a * (b * c));
    }

    #[test]
    fn hermitian_pauli_squares_to_identity(p in pauli_string(9)) {
        let sq = p * p;
        prop_assert!(sq.is_identity_up_to_phase());
        prop_assert!(matches!(sq.sign(), Some(1) | Some(-1)));
    }

    #[test]
    fn commutation_matches_product_order(a in pauli_string(6), b in pauli_string(6)) {
        let ab = a * b;
        let ba = b * a;
        if a.commutes_with(&b) {
            prop_assert_eq!(ab, ba);
        } else {
            prop_assert_eq!(ab, ba.negate());
        }
    }

    #[test]
    fn noiseless_frame_never_flips(ops in circuit(5)) {
        let mut f = PauliFrame::new(5);
        for op in &ops {
            if let Op::Gate(g, a, b) = *op {
                if g.arity() == 2 && a == b { continue; }
                f.apply(g, &[a, b][..g.arity()]);
            }
        }
        prop_assert!(f.is_identity());
    }

    /// A frame error pushed through a circuit flips exactly those deterministic
    /// measurements whose tableau outcome changes when the error is applied.
    #[test]
    fn frame_flip_matches_tableau_with_error(ops in circuit(4), q in 0usize..4, e in 1usize..4) {
        let err = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][e];
        let mut clean = Tableau::new(4);
        let mut noisy = Tableau::new(4);
        noisy.apply_pauli(&PauliString::single(4, q, err)).unwrap();
        let mut f = PauliFrame::new(4);
        f.inject(q, err);
        for op in &ops {
            if let Op::Gate(g, a, b) = *op {
                if g.arity() == 2 && a == b { continue; }
                clean.apply(g, &[a, b][..g.arity()]).unwrap();
                noisy.apply(g, &[a, b][..g.arity()]).unwrap();
                f.apply(g, &[a, b][..g.arity()]);
            }
        }
        for m in 0..4 {
            let z = PauliString::single(4, m, Pauli::Z);
            let (c, n) = (clean.expectation(&z).unwrap(), noisy.expectation(&z).unwrap());
            if c != 0 {
                prop_assert_eq!(c != n, f.measure_flip(m));
            }
        }
    }
}
