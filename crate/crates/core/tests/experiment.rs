use proptest::prelude::*;

use surface17::code::{build_surface17, Basis, NUM_DATA};
use surface17::experiment::*;
use surface17::noise::DeviceParams;
use surface17::sim::Pauli;

fn noiseless(state: InitialState, n: u32) -> Program {
    Program::compile(&build_surface17(), &DeviceParams::paper().noiseless(), state, n, false).unwrap()
}

fn fired(syn: &SyndromeRecord) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (m, row) in syn.sigma.iter().enumerate() {
        for (k, &b) in row.iter().enumerate() {
            if b == 1 {
                out.push((m + 1, k));
            }
        }
    }
    out
}

#[test]
fn zero_noise_gives_silent_syndromes() {
    let code = build_surface17();
    let device = DeviceParams::paper().noiseless();
    for state in InitialState::ALL {
        for n in [1, 2, 5, 16] {
            let shots = run_memory_experiment(&code, &device, &RunConfig::new(state, n, 40, 3)).unwrap();
            for shot in &shots {
                assert!(shot.herald_ok);
                let syn = compute_syndromes(shot, &code, FirstRound::Frame);
                assert_eq!(syn.weight(), 0, "{state} n={n}");
                assert!(fired(&syn).is_empty());
                assert_eq!(shot.logical_parity(&code), state.ideal_sign());
            }
        }
    }
}

/// A data error between cycles flips the adjacent stabilizers of the
/// opposite type once, in the following round.
#[test]
fn data_errors_between_cycles_fire_their_stabilizers() {
    let code = build_surface17();
    let n = 3;
    for (state, pauli, basis) in [(InitialState::Zero, Pauli::X, Basis::Z), (InitialState::Plus, Pauli::Z, Basis::X)] {
        let program = noiseless(state, n);
        let after = program.cycle_start_op(2).unwrap();
        for d in 0..NUM_DATA {
            let shot = run_with_fault(&program, Fault::Pauli { after_op: after, qubit: d, pauli }, d as u64);
            let syn = compute_syndromes(&shot, &code, FirstRound::Frame);
            let mut expected: Vec<(usize, usize)> =
                basis.stabilizers().filter(|&k| code.stabilizers[k].data_mask() >> d & 1 == 1).map(|k| (2, k)).collect();
            expected.sort_unstable();
            let mut got = fired(&syn);
            got.retain(|&(_, k)| basis.stabilizers().contains(&k));
            assert_eq!(got, expected, "{pauli:?} on D{}", d + 1);
            assert!(syn.final_sigma.iter().all(|&b| b == 0));
            let flips = code.logical(basis).data_mask() >> d & 1 == 1;
            assert_eq!(shot.logical_parity(&code) == state.ideal_sign(), !flips);
        }
    }
}

/// Without auxiliary reset a misread outcome enters two consecutive
/// stabilizer values, so the detections are two rounds apart.
#[test]
fn auxiliary_readout_errors_fire_rounds_two_apart() {
    let code = build_surface17();
    let program = noiseless(InitialState::Zero, 4);
    for k in 0..4 {
        let shot = run_with_fault(&program, Fault::MeasurementFlip { record: aux_record(2, k) }, 0);
        let syn = compute_syndromes(&shot, &code, FirstRound::Frame);
        assert_eq!(fired(&syn), vec![(2, k), (4, k)]);
    }
    // Last cycle: the partner is the final data round.
    let shot = run_with_fault(&program, Fault::MeasurementFlip { record: aux_record(4, 1) }, 0);
    let syn = compute_syndromes(&shot, &code, FirstRound::Frame);
    assert_eq!(fired(&syn), vec![(4, 1)]);
    assert_eq!(syn.final_sigma, [0, 1, 0, 0]);
}

#[test]
fn records_round_trip_through_jsonl() {
    let code = build_surface17();
    let shots = run_memory_experiment(&code, &DeviceParams::paper(), &RunConfig::new(InitialState::Minus, 3, 200, 9)).unwrap();
    let mut buf = Vec::new();
    write_jsonl(&mut buf, &shots).unwrap();
    assert_eq!(read_jsonl(&buf[..]).unwrap(), shots);
    let text = String::from_utf8(buf).unwrap().replace(&format!("\"schema_version\":{SCHEMA_VERSION}"), "\"schema_version\":999");
    assert!(read_jsonl(text.as_bytes()).is_err());
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let code = build_surface17();
    let device = DeviceParams::paper();
    let cfg = RunConfig::new(InitialState::Zero, 4, 300, 77);
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let a = one.install(|| run_memory_experiment(&code, &device, &cfg).unwrap());
    let b = run_memory_experiment(&code, &device, &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn noisy_runs_fire_detectors() {
    let code = build_surface17();
    let shots = run_memory_experiment(&code, &DeviceParams::paper(), &RunConfig::new(InitialState::Zero, 8, 2000, 1)).unwrap();
    let (kept, summary) = reject_leakage(&shots, RejectionMode::Both);
    assert!(summary.fraction > 0.3 && summary.fraction < 0.95);
    let mean: f64 = kept
        .iter()
        .map(|s| {
            let syn = compute_syndromes(s, &code, FirstRound::Frame);
            syn.sigma[1..].iter().flatten().map(|&b| b as f64).sum::<f64>() / (8.0 * 7.0)
        })
        .sum::<f64>()
        / kept.len() as f64;
    assert!(mean > 0.05 && mean < 0.3, "{mean}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn single_faults_fire_few_detectors(op_frac in 0.0f64..1.0, q in 0usize..17, p in 0usize..3, state in 0usize..4) {
        let state = InitialState::ALL[state];
        let program = noiseless(state, 3);
        let op = ((program.num_ops() - 1) as f64 * op_frac) as usize;
        let fault = Fault::Pauli { after_op: op, qubit: q, pauli: Pauli::NON_IDENTITY[p] };
        let shot = run_with_fault(&program, fault, op as u64);
        let syn = compute_syndromes(&shot, &build_surface17(), FirstRound::Frame);
        prop_assert!(syn.weight() <= 4);
    }

    #[test]
    fn syndromes_are_bits_and_shapes_match(seed in any::<u64>(), n in 1u32..6) {
        let code = build_surface17();
        let shots = run_memory_experiment(&code, &DeviceParams::paper(), &RunConfig::new(InitialState::Plus, n, 5, seed)).unwrap();
        for s in &shots {
            prop_assert_eq!(s.s.len(), n as usize);
            prop_assert!(s.s.iter().flatten().all(|&v| v == 1 || v == -1));
            let syn = compute_syndromes(s, &code, FirstRound::Discard);
            prop_assert_eq!(syn.detectors().len(), 4 * (n as usize + 1));
            prop_assert!(syn.detectors().iter().all(|&b| b <= 1));
            prop_assert!(syn.sigma[0][0..4].iter().all(|&b| b == 0));
            if n >= 2 {
                prop_assert!(syn.sigma[1][0..4].iter().all(|&b| b == 0));
            }
        }
    }

    #[test]
    fn measurement_flips_fire_rounds_two_apart(m in 1u32..4, k in 0usize..8) {
        let code = build_surface17();
        let program = noiseless(InitialState::Zero, 4);
        let shot = run_with_fault(&program, Fault::MeasurementFlip { record: aux_record(m, k) }, 0);
        let syn = compute_syndromes(&shot, &code, FirstRound::Frame);
        let m = m as usize;
        let mut expected = Vec::new();
        // The first X-type round only defines the frame.
        if k < 4 || m > 1 {
            expected.push((m, k));
        }
        if m + 2 <= 4 {
            expected.push((m + 2, k));
        }
        prop_assert_eq!(fired(&syn), expected);
        let final_fired = k < 4 && m + 2 > 4;
        prop_assert_eq!(syn.final_sigma.contains(&1), final_fired);
    }
}
