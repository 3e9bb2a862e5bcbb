use ios_rates::dist::{joint_distance_bound, joint_distance_exact, Metric};
use ios_rates::rates::{
    fit_rate, geometric_grid, growth_threshold_study, is_vanishing, joint_rate_expression, joint_rate_fit,
    log_correction_profile, log_grid, marginal_rate_fit, quadratic_profile_comparison, schedule, Engine, Verdict,
    TAU_CLOSED_FORM, TAU_MIXTURE,
};
use ios_rates::DgpSpec;
use proptest::prelude::*;

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let inner: f64 = (1..panels).map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(a) + f(b) + inner) * h / 3.0
}

/// `TV(P_r, P) = (1/r) ∫₀^r v / (1 − ln v) dv` on the log-correction family,
/// with `v = r e^{−s}` to smooth the endpoint.
fn log_tv(r: f64) -> f64 {
    simpson(|s| {
        let v = r * (-s).exp();
        v / (1.0 - v.ln()) * (-s).exp()
    }, 0.0, 60.0, 60_000)
}

fn by_id(id: &str) -> DgpSpec {
    DgpSpec::by_id(id).unwrap()
}

#[test]
fn gaussian_boundary_marginal_slopes() {
    let spec = by_id("gaussian_boundary");
    let grid = log_grid(1e-3, 1e-1, 13);
    for metric in [Metric::TotalVariation, Metric::Hellinger] {
        let fit = marginal_rate_fit(&spec, metric, &grid, TAU_CLOSED_FORM).unwrap().fit;
        assert!((fit.slope - 1.0).abs() <= 0.05, "{metric}: {}", fit.slope);
        assert_eq!(fit.verdict, Verdict::Consistent);
        assert!(fit.r_squared >= 0.99);
    }
}

#[test]
fn cubic_support_marginal_slopes() {
    let spec = by_id("cubic_support");
    let grid = log_grid(1e-3, 1e-1, 13);
    let h = marginal_rate_fit(&spec, Metric::Hellinger, &grid, TAU_CLOSED_FORM).unwrap().fit;
    let tv = marginal_rate_fit(&spec, Metric::TotalVariation, &grid, TAU_CLOSED_FORM).unwrap().fit;
    assert!((h.slope - 1.5).abs() <= 0.05, "{}", h.slope);
    assert!((tv.slope - 3.0).abs() <= 0.05, "{}", tv.slope);
    // The guaranteed exponent is 1, so the cubic decay is consistent with it.
    assert_eq!(h.verdict, Verdict::Consistent);
    assert!(h.r_squared >= 0.99 && tv.r_squared >= 0.99);
}

#[test]
fn holder_boundary_linear_law() {
    let spec = by_id("holder_boundary_k1");
    let study = marginal_rate_fit(&spec, Metric::TotalVariation, &geometric_grid(0.4, 8), TAU_CLOSED_FORM).unwrap();
    assert!((study.fit.slope - 1.0).abs() <= 0.02);
    for row in &study.rows {
        assert!((row.distance - 0.5 * row.scale / 2.0).abs() < 1e-15);
    }
}

#[test]
fn grids_outside_the_support_are_rejected() {
    let spec = by_id("cubic_support");
    assert!(marginal_rate_fit(&spec, Metric::Hellinger, &[0.1, 0.2, 0.3, 0.4, 0.5, 0.6], 0.05).is_err());
    assert!(marginal_rate_fit(&spec, Metric::Hellinger, &[0.1, 0.2, 0.3], 0.05).is_err());
}

#[test]
fn log_correction_profile_values() {
    let spec = by_id("log_correction");
    let r4 = (-4.0f64).exp();
    let report = log_correction_profile(&spec, &[r4, r4 / 2.0, r4 / 4.0, r4 / 8.0], &[0.1]).unwrap();
    let p = report.rows[0].profile;
    assert!(p > 0.4 && p < 0.6, "{p}");
    assert!((report.rows[0].tv - log_tv(r4)).abs() < 1e-12);
    assert!(report.lower_bound_holds && report.bounded);
}

#[test]
fn log_correction_profile_is_slowly_varying() {
    let spec = by_id("log_correction");
    let grid: Vec<f64> = (4..=40).step_by(4).map(|j| (-(j as f64)).exp()).collect();
    let report = log_correction_profile(&spec, &grid, &[]).unwrap();
    let gaps: Vec<f64> = grid
        .iter()
        .map(|&r| {
            let a = log_tv(r) * (1.0 - r.ln()) / r;
            let b = log_tv(r / 2.0) * (1.0 - (r / 2.0).ln()) / (r / 2.0);
            (a / b - 1.0).abs()
        })
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    assert!(*gaps.last().unwrap() < 1e-3);
    assert!(report.profile_min > 0.4 && report.profile_max < 1.0);
}

#[test]
fn log_correction_beats_no_power_improvement() {
    let spec = by_id("log_correction");
    let grid = log_grid((-12.0f64).exp(), (-4.0f64).exp(), 17);
    let report = log_correction_profile(&spec, &grid, &[0.1, 0.2, 0.5]).unwrap();
    let s = report.power_fit.slope;
    assert!(s > 1.0 && s < 1.15, "{s}");
    // A bound O(r^{1+ε}) would keep TV/r^{1+ε} bounded as r shrinks.
    assert!(report.epsilon_checks.iter().all(|c| c.bound_fails));
    assert!(log_correction_profile(&by_id("gaussian_boundary"), &grid, &[]).is_err());
}

#[test]
fn joint_exact_tracks_the_predicted_rate() {
    let spec = by_id("holder_boundary_k1");
    let n_grid: Vec<usize> = (9..=15).map(|e| 1usize << e).collect();
    let sched = schedule(&n_grid, 0.5, 1.0);
    let study = joint_rate_fit(&spec, Metric::Hellinger, &sched, Engine::Exact, TAU_MIXTURE).unwrap();
    assert!((study.fit.slope - 1.0).abs() <= 0.1, "{}", study.fit.slope);
    assert_eq!(study.fit.verdict, Verdict::Consistent);
    for (row, &(n, k)) in study.rows.iter().zip(&sched) {
        let direct = joint_distance_exact(&spec, n, k, Metric::Hellinger).unwrap().value;
        assert_eq!(row.distance, direct);
    }
}

#[test]
fn bound_engine_dominates_exact_along_the_schedule() {
    let spec = by_id("holder_boundary_k1");
    let n_grid: Vec<usize> = (9..=15).map(|e| 1usize << e).collect();
    let sched = schedule(&n_grid, 0.5, 1.0);
    let exact = joint_rate_fit(&spec, Metric::TotalVariation, &sched, Engine::Exact, TAU_MIXTURE).unwrap();
    let bound = joint_rate_fit(&spec, Metric::TotalVariation, &sched, Engine::Bound, TAU_MIXTURE).unwrap();
    for (e, b) in exact.rows.iter().zip(&bound.rows) {
        assert!(b.distance / e.distance >= 1.0, "n={:?}", e.n);
    }
}

#[test]
fn one_constant_covers_every_schedule() {
    let spec = by_id("holder_boundary_k1");
    let n_grid: Vec<usize> = (6..=14).map(|e| 1usize << e).collect();
    let ratios = |gamma: f64| -> Vec<f64> {
        schedule(&n_grid, gamma, 1.0)
            .into_iter()
            .map(|(n, k)| {
                joint_distance_exact(&spec, n, k, Metric::Hellinger).unwrap().value
                    / joint_rate_expression(&spec, Metric::Hellinger, n, k)
            })
            .collect()
    };
    let fitted = ratios(0.5).into_iter().fold(0.0, f64::max);
    for gamma in [0.3, 0.4, 0.6] {
        let worst = ratios(gamma).into_iter().fold(0.0, f64::max);
        assert!(worst <= 1.5 * fitted, "γ={gamma}: {worst} vs {fitted}");
    }
}

#[test]
fn identical_laws_give_a_degenerate_joint_fit() {
    let spec = by_id("holder_interior_linear");
    let sched = schedule(&[256, 512, 1024, 2048, 4096], 0.5, 1.0);
    let study = joint_rate_fit(&spec, Metric::Hellinger, &sched, Engine::Exact, TAU_MIXTURE).unwrap();
    assert!(study.rows.iter().all(|r| r.distance == 0.0));
    assert_eq!(study.fit.verdict, Verdict::Degenerate);
}

#[test]
fn exact_engine_needs_a_discrete_outcome() {
    let sched = schedule(&[256, 512, 1024, 2048], 0.5, 1.0);
    assert!(joint_rate_fit(&by_id("gaussian_boundary"), Metric::Hellinger, &sched, Engine::Exact, 0.1).is_err());
    assert!(joint_rate_fit(&by_id("gaussian_boundary"), Metric::Hellinger, &sched, Engine::Bound, 0.1).is_ok());
}

#[test]
fn growth_threshold_in_one_dimension() {
    let spec = by_id("holder_boundary_k1");
    let n_grid: Vec<usize> = (3..=24).map(|e| 1usize << e).collect();
    let report = growth_threshold_study(&spec, Metric::Hellinger, &[0.5, 0.8], &n_grid).unwrap();
    assert!((report.threshold - 2.0 / 3.0).abs() < 1e-15);
    let below = &report.series[0];
    assert!(below.asserted && below.vanishing);
    assert!(report.passed);
    let above = &report.series[1];
    assert!(!above.asserted && !above.vanishing);
    let values: Vec<f64> = above.rows.iter().map(|r| r.distance).collect();
    let tail = &values[values.len() - 5..];
    assert!(tail.windows(2).all(|w| w[1] >= w[0]), "{values:?}");
}

#[test]
fn threshold_gamma_is_never_asserted() {
    let spec = by_id("holder_boundary_k1");
    let n_grid: Vec<usize> = (3..=12).map(|e| 1usize << e).collect();
    let report = growth_threshold_study(&spec, Metric::Hellinger, &[2.0 / 3.0], &n_grid).unwrap();
    assert!(!report.series[0].asserted);
}

#[test]
fn vanishing_classifier() {
    assert!(is_vanishing(&[1.0, 0.5, 0.2, 0.05]));
    assert!(!is_vanishing(&[1.0, 0.5, 0.2, 0.3]));
    assert!(!is_vanishing(&[1.0, 0.5, 0.2]));
    assert!(!is_vanishing(&[1.0, 0.2]));
}

#[test]
fn quadratic_profile_contrast() {
    let grid = log_grid(1e-3, 1e-1, 9);
    let specs = [by_id("holder_interior_quadratic"), by_id("gaussian_boundary"), by_id("gaussian_interior")];
    let rows = quadratic_profile_comparison(&specs, &grid, TAU_CLOSED_FORM).unwrap();
    assert!((rows[0].tv.slope - 2.0).abs() <= 0.05, "{}", rows[0].tv.slope);
    assert!(rows[0].quadratic);
    assert!((rows[1].h.slope - 1.0).abs() <= 0.05);
    assert!(rows[1].boundary && !rows[1].quadratic);
    assert!(rows[2].tv.slope >= 1.95, "{}", rows[2].tv.slope);
}

#[test]
fn holder_interior_quadratic_closed_form() {
    // c₂-quadratic interior law: TV(P_r, P) = c₂ r² / 3.
    let spec = by_id("holder_interior_quadratic");
    let study = marginal_rate_fit(&spec, Metric::TotalVariation, &geometric_grid(0.2, 8), TAU_CLOSED_FORM).unwrap();
    for row in &study.rows {
        assert!((row.distance - 0.8 * row.scale * row.scale / 3.0).abs() < 1e-15, "r={}", row.scale);
    }
}

#[test]
fn bound_and_exact_at_matched_points() {
    let spec = by_id("holder_boundary_k05");
    for (n, k) in [(1000, 10), (10_000, 100)] {
        let e = joint_distance_exact(&spec, n, k, Metric::Hellinger).unwrap().value;
        let b = joint_distance_bound(&spec, n, k, Metric::Hellinger).unwrap().value;
        assert!(b >= e);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn fits_ignore_a_common_distance_scale(
        slope in -3.0f64..3.0,
        noise in prop::collection::vec(-0.2f64..0.2, 8),
        lambda in 1e-3f64..1e3,
    ) {
        let pts: Vec<(f64, f64)> = noise.iter().enumerate()
            .map(|(i, e)| { let r = 0.5f64.powi(i as i32); (r, r.powf(slope) * e.exp()) })
            .collect();
        let scaled: Vec<(f64, f64)> = pts.iter().map(|(r, d)| (*r, d * lambda)).collect();
        let a = fit_rate(&pts, slope, true, 0.1).unwrap();
        let b = fit_rate(&scaled, slope, true, 0.1).unwrap();
        prop_assert!((a.slope - b.slope).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&a.r_squared));
        prop_assert!((a.intercept + lambda.ln() - b.intercept).abs() < 1e-9);
    }
}
