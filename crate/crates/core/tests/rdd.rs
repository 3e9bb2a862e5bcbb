use ios_rates::rdd::{
    cvm_statistic, permutation_test, q_rule, size_power_simulation, size_power_simulation_with, two_sided_sample,
    PermSettings,
};
use ios_rates::rng::stream_rng;
use ios_rates::DgpSpec;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// `T` straight from the displayed formula: ECDFs with `I{s ≤ t}`.
fn brute_cvm(left: &[f64], right: &[f64]) -> f64 {
    let ecdf = |block: &[f64], t: f64| block.iter().filter(|s| **s <= t).count() as f64 / block.len() as f64;
    let all: Vec<f64> = left.iter().chain(right).copied().collect();
    all.iter().map(|&t| (ecdf(left, t) - ecdf(right, t)).powi(2)).sum::<f64>() / all.len() as f64
}

/// Every way of choosing the left block, as index masks over `0..k`.
fn splits(k: usize) -> Vec<Vec<bool>> {
    (0u32..1 << k)
        .filter(|m| m.count_ones() as usize == k / 2)
        .map(|m| (0..k).map(|i| m >> i & 1 == 1).collect())
        .collect()
}

fn split_stat(s: &[f64], left: &[bool]) -> f64 {
    let l: Vec<f64> = s.iter().zip(left).filter(|(_, b)| **b).map(|(v, _)| *v).collect();
    let r: Vec<f64> = s.iter().zip(left).filter(|(_, b)| !**b).map(|(v, _)| *v).collect();
    brute_cvm(&l, &r)
}

fn exact_p_by_hand(s: &[f64]) -> f64 {
    let k = s.len();
    let observed = brute_cvm(&s[..k / 2], &s[k / 2..]);
    let all = splits(k);
    all.iter().filter(|m| split_stat(s, m) >= observed - 1e-12).count() as f64 / all.len() as f64
}

#[test]
fn worked_example_statistic() {
    assert_eq!(cvm_statistic(&[0.0, 1.0, 3.0, 8.0]).unwrap(), 0.375);
    assert_eq!(brute_cvm(&[0.0, 1.0], &[3.0, 8.0]), 0.375);
}

#[test]
fn disjoint_supports_match_the_ecdf_oracle() {
    let s = [0.0, 1.0, 10.0, 11.0];
    let t = cvm_statistic(&s).unwrap();
    assert!((t - brute_cvm(&s[..2], &s[2..])).abs() < 1e-15);
    assert_eq!(cvm_statistic(&[2.0, 5.0, 2.0, 5.0]).unwrap(), 0.0);
    assert!(cvm_statistic(&[1.0, 2.0, 3.0]).is_err());
}

#[test]
fn exact_p_value_by_enumeration() {
    let s = [0.0, 1.0, 3.0, 8.0];
    let r = permutation_test(&s, 0.05, 1000, 0, 1).unwrap();
    assert!(r.exact);
    assert_eq!(r.n_perms, 5);
    assert!((r.p_value - exact_p_by_hand(&s)).abs() < 1e-15);
    assert!(!r.reject);
    let mut rng = stream_rng(9, 0);
    for _ in 0..50 {
        let s: Vec<f64> = (0..8).map(|_| rng.random_range(0..6) as f64).collect();
        let r = permutation_test(&s, 0.1, 1000, 0, 1).unwrap();
        assert!((r.p_value - exact_p_by_hand(&s)).abs() < 1e-12, "{s:?}");
        assert_eq!(r.n_perms, 69);
        assert!(r.p_value >= 1.0 / (r.n_perms + 1) as f64);
        assert_eq!(r.reject, r.p_value <= 0.1);
    }
}

#[test]
fn constant_outcomes_never_reject() {
    let r = permutation_test(&[4.0; 6], 0.05, 1000, 0, 1).unwrap();
    assert_eq!((r.statistic, r.p_value, r.n_perms), (0.0, 1.0, 19));
}

#[test]
fn random_mode_approaches_exact() {
    let mut rng = stream_rng(21, 0);
    for case in 0..5 {
        let s: Vec<f64> = (0..8).map(|_| StandardNormal.sample(&mut rng)).collect();
        let exact = permutation_test(&s, 0.05, 1000, 0, 1).unwrap();
        let n = 100_000;
        let random = permutation_test(&s, 0.05, 0, n, case).unwrap();
        assert!(!random.exact && random.n_perms == n);
        let p = exact.p_value;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((random.p_value - p).abs() <= 3.0 * se + 1.0 / n as f64, "{} vs {p}", random.p_value);
    }
}

#[test]
fn exact_p_values_are_super_uniform() {
    let reps = 20_000;
    let mut rng = stream_rng(33, 0);
    let ps: Vec<f64> = (0..reps)
        .map(|_| {
            let s: Vec<f64> = (0..8).map(|_| StandardNormal.sample(&mut rng)).collect();
            permutation_test(&s, 0.05, 1000, 0, 0).unwrap().p_value
        })
        .collect();
    for alpha in [0.01, 0.05, 0.1] {
        let rate = ps.iter().filter(|p| **p <= alpha).count() as f64 / reps as f64;
        let se = (alpha * (1.0 - alpha) / reps as f64).sqrt();
        assert!(rate <= alpha + 2.0 * se, "α={alpha}: {rate}");
    }
}

#[test]
fn q_rule_examples() {
    assert_eq!(q_rule(1_000_000, 0.6, 1.0), 3981);
    assert_eq!(q_rule(100, 1e-9, 1.0), 2);
    assert_eq!(q_rule(2000, 0.5, 1.0), 44);
    assert_eq!(q_rule(1000, 0.9, 1.0), 501);
}

#[test]
fn two_sided_samples_respect_the_sides() {
    let left = DgpSpec::by_id("holder_boundary_k1").unwrap();
    let right = DgpSpec::by_id("holder_boundary_shifted").unwrap();
    let mut rng = stream_rng(4, 0);
    let data = two_sided_sample(&left, &right, 40_000, &mut rng).unwrap();
    let (mut lsum, mut ln, mut rsum, mut rn) = (0.0, 0, 0.0, 0);
    for i in 0..data.n() {
        let (x, y) = (data.x_row(i)[0], data.y_row(i)[0]);
        assert!(x.abs() <= 0.5);
        if x < 0.0 {
            lsum += y;
            ln += 1;
        } else {
            rsum += y;
            rn += 1;
        }
    }
    // Sides are balanced and the right side carries the larger π.
    assert!((ln as f64 / 40_000.0 - 0.5).abs() < 0.01);
    assert!(rsum / rn as f64 - lsum / ln as f64 > 0.2);
    assert!(two_sided_sample(&DgpSpec::gaussian_boundary(2, 1).unwrap(), &left, 10, &mut rng).is_err());
}

#[test]
fn size_near_nominal_on_a_continuous_null() {
    let spec = DgpSpec::gaussian_boundary(1, 1).unwrap();
    let report = size_power_simulation(&spec, &spec, 2000, 0.5, 1.0, 1500, 0.05, 8).unwrap();
    assert_eq!(report.q, 44);
    assert_eq!(report.rows.len() + report.dropped, 1500);
    let se = (0.05 * 0.95 / report.rows.len() as f64).sqrt();
    assert!((report.rejection_rate - 0.05).abs() <= 3.0 * se, "{}", report.rejection_rate);
    assert!((report.std_error - se).abs() < 0.003);
}

#[test]
fn power_grows_with_n() {
    let left = DgpSpec::by_id("holder_boundary_k1").unwrap();
    let right = DgpSpec::by_id("holder_boundary_shifted").unwrap();
    let perms = PermSettings { max_exact: 20_000, n_random: 999 };
    let rates: Vec<f64> = [500, 2000, 8000]
        .iter()
        .map(|&n| size_power_simulation_with(&left, &right, n, 0.3, 1.0, 600, 0.05, 2, perms).unwrap().rejection_rate)
        .collect();
    assert!(rates.windows(2).all(|w| w[1] > w[0]), "{rates:?}");
}

#[test]
fn simulation_is_reproducible_and_checks_inputs() {
    let spec = DgpSpec::gaussian_boundary(1, 1).unwrap();
    let a = size_power_simulation(&spec, &spec, 200, 0.5, 1.0, 50, 0.05, 3).unwrap();
    let b = size_power_simulation(&spec, &spec, 200, 0.5, 1.0, 50, 0.05, 3).unwrap();
    assert_eq!(a, b);
    assert!(size_power_simulation(&spec, &spec, 200, 0.5, 1.0, 0, 0.05, 3).is_err());
    assert!(size_power_simulation(&spec, &spec, 200, 0.5, 1.0, 10, 1.5, 3).is_err());
}

#[test]
fn small_samples_drop_replications() {
    let spec = DgpSpec::gaussian_boundary(1, 1).unwrap();
    // q = ⌊5 · 10^{0.5}⌋ = 15 per side from 20 points is usually infeasible.
    let report = size_power_simulation(&spec, &spec, 20, 0.5, 5.0, 100, 0.05, 3).unwrap();
    assert!(report.dropped > 50);
    assert_eq!(report.rows.len() + report.dropped, 100);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn statistic_depends_on_ranks_only(
        half in 1usize..8,
        seed in any::<u64>(),
    ) {
        let mut rng = stream_rng(seed, 0);
        let s: Vec<f64> = (0..2 * half).map(|_| rng.random_range(-20..20) as f64 / 4.0).collect();
        let t = cvm_statistic(&s).unwrap();
        for f in [|v: f64| v.exp(), |v: f64| v * v * v + v, |v: f64| v.atan()] {
            let mapped: Vec<f64> = s.iter().map(|v| f(*v)).collect();
            prop_assert_eq!(cvm_statistic(&mapped).unwrap(), t);
        }
        prop_assert!((t - brute_cvm(&s[..half], &s[half..])).abs() < 1e-12);
        prop_assert!(t >= 0.0);
    }

    #[test]
    fn statistic_ignores_order_within_blocks(half in 1usize..10, seed in any::<u64>()) {
        let mut rng = stream_rng(seed, 0);
        let s: Vec<f64> = (0..2 * half).map(|_| rng.random_range(0..5) as f64).collect();
        let mut shuffled = s.clone();
        shuffled[..half].shuffle(&mut rng);
        shuffled[half..].shuffle(&mut rng);
        prop_assert_eq!(cvm_statistic(&shuffled).unwrap(), cvm_statistic(&s).unwrap());
    }
}
