use gspa_core::amplification::{budget_distribution_sample, BudgetDistribution, SampleOptions};
use gspa_core::mechanisms::{freq_estimate, group_cohort, mean_estimate, ClipRange, NoiseSource};
use gspa_core::oracle::{amplify_with_tv_correction, theorem2_chain_check};
use gspa_core::tradeoff::{alpha_grid, dp_epsilon_for_delta, gdp_to_dp};
use gspa_core::{amplify, amplify_composed, central_budget, Cohort, Error};
use proptest::prelude::*;

#[test]
fn accountant_agrees_with_exact_oracle_on_a_mixed_cohort() {
    let cohort = Cohort::from_pairs([(0.2, 0.0), (0.8, 0.0), (1.5, 1e-3), (0.5, 0.0), (2.0, 0.0), (0.05, 0.0), (1.0, 0.0)]).unwrap();
    let report = amplify(&cohort).unwrap();
    let chain = theorem2_chain_check(&cohort, &alpha_grid(1e-3).unwrap(), None).unwrap();
    assert_eq!(chain.distinct_index, report.worst_index);
    assert!((chain.mu.mu() - report.mu.mu()).abs() < 1e-12);
    assert!(chain.passed(1e-9), "{chain:?}");
    let corrected = amplify_with_tv_correction(&cohort).unwrap();
    assert!((corrected.tv_correction.unwrap() - chain.tau).abs() < 1e-15);
}

#[test]
fn central_budget_round_trips_through_delta() {
    let cohort = budget_distribution_sample(BudgetDistribution::Mixed, 5000, 11, SampleOptions::default()).unwrap();
    let b = central_budget(&cohort, 1e-5).unwrap();
    let mu = amplify(&cohort).unwrap().mu;
    assert!((gdp_to_dp(mu, b.epsilon()).unwrap() - 1e-5).abs() < 1e-12);
    assert_eq!(dp_epsilon_for_delta(mu, 1e-5).unwrap(), b.epsilon());
    assert!(b.epsilon() < cohort.max_epsilon());
}

#[test]
fn estimators_run_end_to_end_on_grouped_cohorts() {
    let cohort = group_cohort(3000, &[0.3, 0.5, 0.2], &[0.2, 0.6, 1.2], 0.0).unwrap();
    let data: Vec<f64> = (0..3000).map(|i| 40.0 + (i % 21) as f64).collect();
    let clip = ClipRange::new(20.0, 80.0).unwrap();
    let truth = data.iter().sum::<f64>() / data.len() as f64;
    let exact = mean_estimate(&data, &cohort, clip, &NoiseSource::Zero, 1).unwrap();
    assert!((exact.z - truth).abs() < 1e-9);
    let noisy = mean_estimate(&data, &cohort, clip, &NoiseSource::Seeded(5), 1).unwrap();
    assert!((noisy.z - truth).abs() < 10.0);

    let bits: Vec<bool> = (0..3000).map(|i| i % 4 != 0).collect();
    let f = freq_estimate(&bits, &cohort, &NoiseSource::Seeded(8), 2).unwrap();
    assert!((f.z - 0.75).abs() < 0.2, "{}", f.z);
}

#[test]
fn degenerate_cohorts_are_guarded() {
    assert!(matches!(Cohort::from_pairs([(0.5, 0.0)]).and_then(|c| amplify(&c)), Err(Error::CohortTooSmall(1))));
    let silent = Cohort::from_pairs([(1.0, 1.0), (1.0, 1.0)]).unwrap();
    assert!(amplify(&silent).unwrap_err().is_math_guard());
}

proptest! {
    #[test]
    fn composition_over_epochs_scales_by_sqrt_t(
        eps in prop::collection::vec(0.01f64..3.0, 2..60),
        t in 1usize..200,
    ) {
        let cohort = Cohort::from_pairs(eps.iter().map(|&e| (e, 0.0))).unwrap();
        let mu = amplify(&cohort).unwrap().mu.mu();
        let composed = amplify_composed(&cohort, t).unwrap().mu();
        prop_assert!((composed - (t as f64).sqrt() * mu).abs() <= 1e-12 * composed);
    }

    #[test]
    fn adding_users_never_weakens_the_guarantee(
        eps in prop::collection::vec(0.01f64..3.0, 2..40),
        extra in 0.01f64..3.0,
    ) {
        let base = Cohort::from_pairs(eps.iter().map(|&e| (e, 0.0))).unwrap();
        let mut more = eps.clone();
        more.push(extra);
        let grown = Cohort::from_pairs(more.into_iter().map(|e| (e, 0.0))).unwrap();
        prop_assert!(amplify(&grown).unwrap().mu.mu() <= amplify(&base).unwrap().mu.mu() + 1e-12);
    }
}
