use ios_rates::knn::{
    cdf_estimator, ks_to_normal, mean_estimator, mse_budget, normality_diagnostic, quantile_estimator, target_oracle,
    Statistic,
};
use ios_rates::rng::stream_rng;
use ios_rates::DgpSpec;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};

const S: [f64; 4] = [0.0, 1.0, 3.0, 8.0];

/// `inf{s ∈ S_n : ECDF(s) ≥ τ}` by scanning every sample point.
fn quantile_by_enumeration(s: &[f64], tau: f64) -> f64 {
    s.iter()
        .copied()
        .filter(|&c| s.iter().filter(|v| **v <= c).count() as f64 / s.len() as f64 >= tau)
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn worked_example_estimators() {
    assert_eq!(mean_estimator(&S, 1).unwrap(), vec![3.0]);
    assert_eq!(cdf_estimator(&S, 2.0).unwrap(), 0.5);
    assert_eq!(cdf_estimator(&S, -1.0).unwrap(), 0.0);
    assert_eq!(cdf_estimator(&S, 8.0).unwrap(), 1.0);
    assert_eq!(quantile_estimator(&S, 0.5).unwrap(), 1.0);
    assert_eq!(quantile_by_enumeration(&S, 0.5), 1.0);
    assert_eq!(mean_estimator(&[2.5; 7], 1).unwrap(), vec![2.5]);
}

#[test]
fn bad_inputs_are_rejected() {
    assert!(mean_estimator(&[], 1).is_err());
    assert!(quantile_estimator(&S, 0.0).is_err());
    assert!(quantile_estimator(&S, 1.0).is_err());
    assert!(cdf_estimator(&[], 0.0).is_err());
}

#[test]
fn multivariate_mean_is_componentwise() {
    let s = [1.0, 10.0, 3.0, 30.0];
    assert_eq!(mean_estimator(&s, 2).unwrap(), vec![2.0, 20.0]);
    assert_eq!(Statistic::Cdf(2.0).evaluate(&s, 2).unwrap(), vec![0.5]);
}

#[test]
fn statistic_parsing() {
    assert_eq!("mean".parse::<Statistic>().unwrap(), Statistic::Mean);
    assert_eq!("cdf:2".parse::<Statistic>().unwrap(), Statistic::Cdf(2.0));
    assert_eq!("quantile:0.25".parse::<Statistic>().unwrap(), Statistic::Quantile(0.25));
    assert!("quantile:1.5".parse::<Statistic>().is_err());
    assert!("median".parse::<Statistic>().is_err());
    assert!("cdf:x".parse::<Statistic>().is_err());
    for s in [Statistic::Mean, Statistic::Cdf(-0.5), Statistic::Quantile(0.9)] {
        assert_eq!(s.to_string().parse::<Statistic>().unwrap(), s);
    }
    assert_eq!(serde_json::to_string(&Statistic::Cdf(2.0)).unwrap(), r#"{"kind":"cdf","at":2.0}"#);
}

#[test]
fn target_oracles() {
    let holder = target_oracle(&DgpSpec::by_id("holder_boundary_k1").unwrap(), Statistic::Mean).unwrap();
    assert_eq!((holder.target[0], holder.sigma), (0.5, 0.5));
    let gauss = target_oracle(&DgpSpec::gaussian_boundary(1, 1).unwrap(), Statistic::Cdf(0.0)).unwrap();
    assert!((gauss.target[0] - 0.5).abs() < 1e-15 && (gauss.sigma - 0.5).abs() < 1e-15);
    let gauss = target_oracle(&DgpSpec::gaussian_boundary(1, 1).unwrap(), Statistic::Mean).unwrap();
    assert_eq!((gauss.target[0], gauss.sigma), (0.0, 1.0));
    assert!(target_oracle(&DgpSpec::gaussian_boundary(1, 1).unwrap(), Statistic::Quantile(0.5)).is_err());
}

#[test]
fn ks_distance_matches_a_direct_evaluation() {
    let normal = Normal::standard();
    let mut rng = stream_rng(12, 0);
    for _ in 0..20 {
        let draws: Vec<f64> = (0..300).map(|_| rng.random_range(-3.0..3.0)).collect();
        // sup over t of |ECDF(t) − Φ(t)|, checked just below and at each draw.
        let ecdf_le = |t: f64| draws.iter().filter(|v| **v <= t).count() as f64 / draws.len() as f64;
        let ecdf_lt = |t: f64| draws.iter().filter(|v| **v < t).count() as f64 / draws.len() as f64;
        let want = draws
            .iter()
            .map(|&t| (ecdf_le(t) - normal.cdf(t)).abs().max((ecdf_lt(t) - normal.cdf(t)).abs()))
            .fold(0.0, f64::max);
        assert!((ks_to_normal(&draws) - want).abs() < 1e-12);
    }
    let r = 1000;
    let grid: Vec<f64> = (0..r).map(|i| normal.inverse_cdf((i as f64 + 0.5) / r as f64)).collect();
    assert!((ks_to_normal(&grid) - 0.5 / r as f64).abs() < 1e-9, "{}", ks_to_normal(&grid));
}

#[test]
fn degenerate_target_is_flagged() {
    let spec = DgpSpec::by_id("cubic_support").unwrap();
    let report = normality_diagnostic(&spec, Statistic::Mean, 2000, 40, 200, 1).unwrap();
    assert!(report.degenerate);
    assert!(report.ks_distance.is_none() && report.standardized_draws.is_none());
    assert_eq!(report.sigma, 0.0);
}

#[test]
fn gaussian_mean_is_close_to_normal() {
    let spec = DgpSpec::gaussian_boundary(1, 1).unwrap();
    let report = normality_diagnostic(&spec, Statistic::Mean, 10_000, 100, 4000, 5).unwrap();
    assert!(!report.degenerate);
    let ks = report.ks_distance.unwrap();
    assert!(ks <= report.budget.unwrap(), "ks {ks} budget {:?}", report.budget);
    assert_eq!(report.standardized_draws.as_ref().unwrap().len(), 4000);
    assert!((report.estimate[0] - report.target[0]).abs() < 0.02);
}

#[test]
fn diagnostic_is_reproducible() {
    let spec = DgpSpec::by_id("holder_boundary_k1").unwrap();
    let a = normality_diagnostic(&spec, Statistic::Cdf(0.0), 500, 20, 300, 9).unwrap();
    let b = normality_diagnostic(&spec, Statistic::Cdf(0.0), 500, 20, 300, 9).unwrap();
    assert_eq!(a, b);
    assert!(normality_diagnostic(&spec, Statistic::Mean, 500, 0, 10, 9).is_err());
    assert!(normality_diagnostic(&spec, Statistic::Mean, 500, 20, 0, 9).is_err());
}

#[test]
fn mse_budget_holds_on_a_grid() {
    let spec = DgpSpec::by_id("holder_boundary_k1").unwrap();
    for n in [1000, 10_000] {
        for k in [10, 50] {
            let b = mse_budget(&spec, n, k, 4000, 17).unwrap();
            assert!(b.holds, "n={n} k={k}: {b:?}");
            assert!(b.mse <= b.budget + 3.0 * b.mse_se);
            assert_eq!(b.bound, 1.0);
        }
    }
    assert!(mse_budget(&DgpSpec::gaussian_boundary(1, 1).unwrap(), 1000, 10, 10, 1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn mean_matches_naive_sum_and_ignores_order(
        values in prop::collection::vec(-100.0f64..100.0, 1..60),
        seed in any::<u64>(),
    ) {
        let naive = values.iter().sum::<f64>() / values.len() as f64;
        let got = mean_estimator(&values, 1).unwrap()[0];
        prop_assert!((got - naive).abs() <= 1e-15 * naive.abs().max(1.0) * 4.0);
        let mut shuffled = values.clone();
        shuffled.shuffle(&mut stream_rng(seed, 0));
        let again = mean_estimator(&shuffled, 1).unwrap()[0];
        prop_assert!((again - got).abs() <= 1e-13 * got.abs().max(1.0));
    }

    #[test]
    fn cdf_is_monotone_and_right_continuous(values in prop::collection::vec(-5i32..5, 1..30)) {
        let s: Vec<f64> = values.iter().map(|v| *v as f64).collect();
        let mut grid: Vec<f64> = s.iter().flat_map(|v| [v - 1e-9, *v, v + 1e-9]).collect();
        grid.sort_by(f64::total_cmp);
        let f: Vec<f64> = grid.iter().map(|t| cdf_estimator(&s, *t).unwrap()).collect();
        prop_assert!(f.windows(2).all(|w| w[0] <= w[1]));
        for v in &s {
            prop_assert_eq!(cdf_estimator(&s, *v).unwrap(), cdf_estimator(&s, v + 1e-9).unwrap());
        }
    }

    #[test]
    fn quantile_is_the_generalised_inverse(
        values in prop::collection::vec(-5i32..5, 1..30),
        tau in 0.001f64..0.999,
    ) {
        let s: Vec<f64> = values.iter().map(|v| *v as f64).collect();
        let q = quantile_estimator(&s, tau).unwrap();
        prop_assert_eq!(q, quantile_by_enumeration(&s, tau));
        prop_assert!(cdf_estimator(&s, q).unwrap() >= tau);
    }
}
