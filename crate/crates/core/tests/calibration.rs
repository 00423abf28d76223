use nalgebra::DVector;
use proptest::prelude::*;
use surface17::calibration::*;

fn overlapping_model(sigma: f64) -> GaussianMixture3 {
    GaussianMixture3 {
        components: [
            GaussianComponent::isotropic([0.0, 1.0], sigma, 1.0 / 3.0),
            GaussianComponent::isotropic([0.866, -0.5], sigma, 1.0 / 3.0),
            GaussianComponent::isotropic([-0.866, -0.5], sigma, 1.0 / 3.0),
        ],
    }
}

#[test]
fn assignment_error_matches_planted_overlap() {
    // Width chosen so that the three-level Bayes error is close to 2%.
    let model = overlapping_model(0.37);
    let expected = bayes_error(&model, 3, 1200);
    assert!((expected - 0.02).abs() < 0.005, "{expected}");
    let batch = synthesize_iq(&model, 100_000, 17).unwrap();
    let fit = fit_gmm3(&batch, &GmmOptions::default()).unwrap();
    let assigned = fit.model.assign_batch(&batch, 3, true);
    let eps = readout_error(&assigned, &batch.labels(), 3).unwrap();
    let se = (expected * (1.0 - expected) / 300_000.0).sqrt();
    assert!((eps - expected).abs() < 4.0 * se + 1e-3, "{eps} vs {expected}");
    let two = fit.model.assign_batch(&batch, 2, true);
    assert!(two.iter().all(|&a| a < 2));
    let eps2 = readout_error(&two, &batch.labels(), 2).unwrap();
    assert!(eps2 < eps);
}

#[test]
fn em_log_likelihood_is_monotone() {
    let batch = synthesize_iq(&overlapping_model(0.45), 5000, 2).unwrap();
    let fit = fit_gmm3(&batch, &GmmOptions::default()).unwrap();
    assert!(fit.iterations >= 1);
    assert!(fit.log_likelihood.windows(2).all(|w| w[1] >= w[0]));
    let w: f64 = fit.model.components.iter().map(|c| c.weight).sum();
    assert!((w - 1.0).abs() < 1e-12);
}

#[test]
fn em_iteration_cap_is_reported() {
    let batch = synthesize_iq(&overlapping_model(0.5), 2000, 9).unwrap();
    let opts = GmmOptions { max_iter: 1, tol: 0.0, ..GmmOptions::default() };
    assert!(fit_gmm3(&batch, &opts).is_err());
}

#[test]
fn one_compensation_round_suppresses_crosstalk_by_two_orders() {
    let truth = planted_crosstalk(17, 1e-3, 21);
    let report = flux_compensation_study(&truth, 1e-5, 2, 5).unwrap();
    assert!((report.initial_off_diagonal - 1e-3).abs() < 1e-12);
    assert!(report.initial_off_diagonal / report.rounds[0].residual_off_diagonal >= 100.0, "{report:?}");
    assert!(report.suppression >= 100.0);
    assert!(report.rounds[0].condition_number < 1.1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn readout_error_is_bounded(assign in prop::collection::vec(0u8..3, 30), levels in 2usize..=3) {
        let labels: Vec<u8> = (0..30).map(|i| (i % 3) as u8).collect();
        let eps = readout_error(&assign, &labels, levels).unwrap();
        let c = confusion_matrix(&assign, &labels, levels).unwrap();
        prop_assert!((0.0..=1.0).contains(&eps));
        // No worse than guessing.
        if (0..levels).map(|i| c[i][i]).sum::<f64>() >= 1.0 {
            prop_assert!(eps <= 1.0 - 1.0 / levels as f64 + 1e-12);
        }
        let diagonal = (0..levels).all(|i| (0..levels).all(|j| i == j || c[i][j] == 0.0));
        let perfect = (0..levels).all(|i| c[i][i] == 1.0);
        prop_assert_eq!(eps == 0.0, diagonal && perfect);
    }

    #[test]
    fn compensation_round_trips(seed in any::<u64>(), off in 1e-4f64..5e-3, target in prop::collection::vec(-0.5f64..0.5, 17)) {
        let c = planted_crosstalk(17, off, seed);
        let v = compensate(&c, &target).unwrap();
        let phi = c.matrix() * DVector::from_vec(v);
        for (a, b) in phi.iter().zip(&target) {
            prop_assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn dephasing_flip_is_monotone(g in 0.0f64..10.0, tau in 0.0f64..2000.0, extra in 0.0f64..1000.0) {
        let a = dephasing_to_flip(g, tau).unwrap();
        let b = dephasing_to_flip(g, tau + extra).unwrap();
        prop_assert!((0.0..0.5).contains(&a) || a == 0.5);
        prop_assert!(b >= a);
    }
}
