//! Device parameters and the stochastic processes derived from them: Pauli
//! channels for idling and gates, readout misclassification and leakage.

mod channel;
mod device;
mod leakage;

pub use channel::{gate_channel, idle_channel, sample_readout, PauliChannel};
pub use device::{DeviceParams, LeakageParams, PairParams, QubitParams, Timing, TwoQubitDefaults};
pub use leakage::{sample_leakage, LeakageTrace};

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn idle_channel_reference_values() {
        let c = idle_channel(30.0, 30.0, 1100.0).unwrap();
        let p = c.probs();
        let expected = -(-1.1f64 / 30.0).exp_m1() / 4.0;
        assert!((p[1] - expected).abs() < 1e-15);
        assert!((p[1] - 0.0090008).abs() < 1e-6);
        assert!((p[3] - 0.0090008).abs() < 1e-6);
        assert_eq!(idle_channel(30.0, 30.0, 0.0).unwrap(), PauliChannel::identity(1));
        assert!(idle_channel(0.0, 30.0, 10.0).is_err());
    }

    #[test]
    fn pure_relaxation_limit_leaves_only_second_order_dephasing() {
        let t1 = 20.0;
        let c = idle_channel(t1, 2.0 * t1, 1000.0).unwrap();
        let a = (-1.0f64 / (2.0 * t1)).exp();
        assert!((c.probs()[3] - (1.0 - a).powi(2) / 4.0).abs() < 1e-15);
        assert!(c.probs()[3] < 2e-4);
    }

    #[test]
    fn gate_channel_matches_average_infidelity() {
        let one = gate_channel(0.0009, 1).unwrap();
        assert!((one.error_probability() - 0.00135).abs() < 1e-15);
        assert!((one.average_infidelity() - 0.0009).abs() < 1e-15);
        let two = gate_channel(0.015, 2).unwrap();
        assert!((two.probs()[5] - 0.00125).abs() < 1e-15);
        assert!((two.average_infidelity() - 0.015).abs() < 1e-15);
        assert_eq!(gate_channel(0.0, 2).unwrap(), PauliChannel::identity(2));
        assert!(gate_channel(0.9, 1).is_err());
    }

    #[test]
    fn readout_flip_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let flips = (0..n).filter(|_| sample_readout(1, 0.009, &mut rng) == -1).count() as f64;
        let sigma = (0.009f64 * 0.991 / n as f64).sqrt();
        assert!((flips / n as f64 - 0.009).abs() < 3.0 * sigma);
        assert_eq!(sample_readout(-1, 0.0, &mut rng), -1);
    }

    #[test]
    fn leakage_is_absorbing_and_flagged() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let none = sample_leakage(&LeakageParams::none(), 16, &mut rng);
        assert!(!none.any_aux_flag() && !none.any_data_flag());
        let params = LeakageParams { aux_leak: 0.2, aux_false_positive: 0.0, data_leak: 0.0, data_false_positive: 0.0 };
        for _ in 0..100 {
            let t = sample_leakage(&params, 8, &mut rng);
            for k in 0..8 {
                if let Some(m) = t.leaked_at[9 + k] {
                    assert!((m as usize..=8).all(|c| t.aux_flags[c - 1] >> k & 1 == 1));
                }
            }
        }
    }

    #[test]
    fn aux_retention_per_cycle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let params = LeakageParams { aux_leak: 0.0094, aux_false_positive: 0.0, data_leak: 0.0, data_false_positive: 0.0 };
        let n = 200_000;
        let kept = (0..n).filter(|_| !sample_leakage(&params, 1, &mut rng).any_aux_flag()).count() as f64;
        let expected = (1.0f64 - 0.0094).powi(8);
        assert!((kept / n as f64 - expected).abs() < 4.0 * (expected * (1.0 - expected) / n as f64).sqrt());
    }
}
