use geoinar::diagnostics::{aic, dispersion_test, pit_histogram, theoretical_mixed_moment};
use geoinar::distributions::{geo_pmf, zmg_pmf, zmnb_pmf, GeoParams, ZmgParams, ZmnbParams};
use geoinar::estimation::{fit_cls, fit_ml, fit_yw, log_likelihood, MlOptions};
use geoinar::forecasting::{forecast_distribution, point_forecast, PointRule};
use geoinar::process::{
    conditional_mean, conditional_variance, joint_pgf, simulate, transition_pmf, transition_row,
    InitialState,
};
use geoinar::{CountSeries, GeoInarModel};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `(mu, alpha)` with `alpha` a fraction of its admissible range.
fn model_strategy() -> impl Strategy<Value = GeoInarModel> {
    (0.2f64..8.0, 0.02f64..0.98).prop_map(|(mu, r)| {
        GeoInarModel::new(mu, r * GeoInarModel::alpha_upper(mu)).unwrap()
    })
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len()];
    for k in 0..a.len() {
        out[k] = (0..=k).map(|i| a[i] * b[k - i]).sum();
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn zmnb_is_a_zmg_convolution(pi in 0.0f64..0.95, mu_eps in 0.1f64..6.0, x in 1u64..7) {
        let zmg = ZmgParams::new(pi, mu_eps).unwrap();
        let base: Vec<f64> = (0..=30).map(|k| zmg_pmf(zmg, k)).collect();
        let mut conv = base.clone();
        for _ in 1..x {
            conv = convolve(&conv, &base);
        }
        let p = ZmnbParams::new(pi, mu_eps, x).unwrap();
        for (k, c) in conv.iter().enumerate() {
            prop_assert!((zmnb_pmf(p, k as u64) - c).abs() < 1e-12);
        }
    }

    #[test]
    fn rows_are_probability_vectors(m in model_strategy(), i in 0u64..30) {
        let jmax = 60 + (i as f64 + 40.0 * m.mu()) as u64;
        let row = transition_row(&m, i, 1, jmax);
        prop_assert!(row.iter().all(|&p| (0.0..=1.0).contains(&p)));
        let total: f64 = row.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-8, "row sum {}", total);
    }

    #[test]
    fn detailed_balance(m in model_strategy(), i in 0u64..25, j in 0u64..25) {
        let g = m.marginal();
        let lhs = geo_pmf(g, i) * transition_pmf(&m, i, j);
        let rhs = geo_pmf(g, j) * transition_pmf(&m, j, i);
        prop_assert!((lhs - rhs).abs() < 1e-12 * lhs.max(rhs).max(1e-300) + 1e-300);
    }

    #[test]
    fn joint_pgf_is_symmetric(m in model_strategy(), s1 in -1.0f64..1.0, s2 in -1.0f64..1.0) {
        prop_assert_eq!(joint_pgf(&m, s1, s2).unwrap(), joint_pgf(&m, s2, s1).unwrap());
    }

    #[test]
    fn predictive_moments(m in model_strategy(), x in 0u64..20, h in 1u32..6) {
        let p = forecast_distribution(&m, x, h, 1e-14).unwrap();
        prop_assert!((p.mean() - conditional_mean(&m, x, h)).abs() < 1e-6);
        prop_assert!((p.variance() - conditional_variance(&m, x, h)).abs() < 1e-6 * conditional_variance(&m, x, h).max(1.0));
    }

    #[test]
    fn zero_lag_mixed_moment_is_second_moment(m in model_strategy()) {
        let mu = m.mu();
        let v = theoretical_mixed_moment(&m, 0, None).unwrap();
        prop_assert!((v - (mu * (1.0 + mu) + mu * mu)).abs() < 1e-12 * v);
    }

    #[test]
    fn aic_is_decreasing_in_loglik(a in -1e4f64..0.0, d in 1e-6f64..100.0, k in 1usize..5) {
        prop_assert!(aic(a + d, k) < aic(a, k));
    }

    #[test]
    fn pit_bins_form_a_distribution(m in model_strategy(), seed in 0u64..1000, bins in 1usize..20) {
        let s = simulate(&m, 60, &mut ChaCha8Rng::seed_from_u64(seed), InitialState::Stationary).unwrap();
        let h = pit_histogram(&m, &s, bins).unwrap();
        prop_assert_eq!(h.len(), bins);
        prop_assert!(h.iter().all(|&b| b >= 0.0));
        prop_assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn dispersion_index_ignores_time_order(values in prop::collection::vec(0u64..30, 3..80)) {
        prop_assume!(values.iter().any(|&v| v > 0));
        let s = CountSeries::new(values.clone()).unwrap();
        let mut rev = values;
        rev.reverse();
        let r = CountSeries::new(rev).unwrap();
        prop_assert_eq!(dispersion_test(&s, Some(0.2)).unwrap().index, dispersion_test(&r, Some(0.2)).unwrap().index);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn ml_dominates_moment_fits(m in model_strategy(), seed in 0u64..10_000) {
        let s = simulate(&m, 150, &mut ChaCha8Rng::seed_from_u64(seed), InitialState::Stationary).unwrap();
        prop_assume!(fit_cls(&s).is_ok());
        let ml = fit_ml(&s, &MlOptions::default()).unwrap();
        let ll = ml.loglik.unwrap();
        prop_assert!(ml.alpha_hat < ml.mu_hat / (1.0 + ml.mu_hat));
        for fit in [fit_cls(&s).unwrap(), fit_yw(&s).unwrap()] {
            if let Ok(model) = fit.geoinar() {
                prop_assert!(ll >= log_likelihood(&model, &s) - 1e-9);
            }
        }
    }
}

#[test]
fn median_is_monotone_in_last_value() {
    for (mu, alpha) in [(1.4239, 0.3137), (5.0, 0.5), (5.0, 0.7), (0.5, 0.2)] {
        let m = GeoInarModel::new(mu, alpha).unwrap();
        for h in 1..=5 {
            let mut prev = 0;
            for x in 0..=40 {
                let med = point_forecast(&m, x, h, PointRule::Median).unwrap();
                assert!(med >= prev, "median fell at x = {x}, h = {h}, {m:?}");
                prev = med;
            }
        }
    }
}

#[test]
fn geometric_truncation_leaves_little_mass() {
    let g = GeoParams::new(5.0).unwrap();
    let total: f64 = (0..=300).map(|k| geo_pmf(g, k)).sum();
    assert!((total - 1.0).abs() < 1e-12);
}
