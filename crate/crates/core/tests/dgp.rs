use ios_rates::dgp::HolderParams;
use ios_rates::dist::{marginal_distance, qmd_remainder, Metric};
use ios_rates::rates::geometric_grid;
use ios_rates::{ConditionalLaw, DgpSpec};

/// Composite Simpson rule with `panels` (even) sub-intervals.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let inner: f64 = (1..panels).map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(a) + f(b) + inner) * h / 3.0
}

fn pmf(law: &ConditionalLaw) -> Vec<f64> {
    match law {
        ConditionalLaw::Discrete { pmf, .. } => pmf.clone(),
        other => panic!("expected a discrete law, got {other:?}"),
    }
}

fn delta(u: f64) -> f64 {
    if u <= 0.0 || u > (-2.0f64).exp() {
        0.0
    } else {
        u / (1.0 - u.ln())
    }
}

/// `(1/r) ∫₀^r δ(v) dv` after `v = r e^{−s}`, which smooths the endpoint.
fn mean_delta(r: f64) -> f64 {
    simpson(|s| delta(r * (-s).exp()) * (-s).exp(), 0.0, 60.0, 60_000)
}

#[test]
fn gaussian_boundary_construction() {
    let s = DgpSpec::gaussian_boundary(1, 1).unwrap();
    assert!(s.boundary);
    assert_eq!((s.exponents.a_h, s.exponents.a_tv), (1.0, 1.0));
    match s.conditional_law(&[0.0]).unwrap() {
        ConditionalLaw::GaussianLocation { mean } => assert_eq!(mean, vec![0.0]),
        other => panic!("unexpected law {other:?}"),
    }
}

#[test]
fn gaussian_boundary_ball_slope_at_zero() {
    // d/dr P_r(Y > 0) at 0 equals Γ(d/2+1) / (√2 π Γ((d+3)/2)) = 1/(2√(2π)) for d = 1.
    let s = DgpSpec::gaussian_boundary(1, 1).unwrap();
    let gamma_form = statrs::function::gamma::gamma(1.5) / (2f64.sqrt() * std::f64::consts::PI * statrs::function::gamma::gamma(2.0));
    let target = 1.0 / (2.0 * (2.0 * std::f64::consts::PI).sqrt());
    assert!((gamma_form - target).abs() < 1e-14);
    let r = 1e-3;
    let ConditionalLaw::Density1d(h) = s.ball_law(r).unwrap() else { panic!("expected a density") };
    let upper = simpson(|y| h.pdf(y), 0.0, 12.0, 24_000);
    assert!(((upper - 0.5) / r - target).abs() < 1e-6, "slope {}", (upper - 0.5) / r);
    let total = simpson(|y| h.pdf(y), -12.0, 12.0, 48_000);
    assert!((total - 1.0).abs() < 1e-10);
}

#[test]
fn gaussian_ball_density_tends_to_standard_normal() {
    let s = DgpSpec::gaussian_boundary(1, 1).unwrap();
    let ConditionalLaw::Density1d(h) = s.ball_law(1e-6).unwrap() else { panic!() };
    for y in [-2.0f64, -0.5, 0.0, 0.7, 1.9] {
        let phi = (-0.5 * y * y).exp() / (2.0 * std::f64::consts::PI).sqrt();
        assert!((h.pdf(y) - phi).abs() < 1e-6);
    }
}

#[test]
fn log_correction_construction() {
    let s = DgpSpec::by_id("log_correction").unwrap();
    assert_eq!(s.pi0().unwrap(), 0.5);
    assert!(s.exponents.log_correction);
    let r = (-4.0f64).exp();
    let tv = marginal_distance(&s, r, Metric::TotalVariation).unwrap().value;
    assert!((tv - mean_delta(r)).abs() < 1e-12, "tv {tv} oracle {}", mean_delta(r));
    for j in 5..12 {
        let r = (-(j as f64)).exp();
        let tv = marginal_distance(&s, r, Metric::TotalVariation).unwrap().value;
        assert!(tv >= 0.375 * r / (1.0 - (r / 2.0).ln()));
    }
}

#[test]
fn cubic_support_construction() {
    let s = DgpSpec::by_id("cubic_support").unwrap();
    assert_eq!(pmf(&s.conditional_law(&[0.0]).unwrap()), vec![1.0, 0.0]);
    for r in [0.01, 0.1, 0.3, 0.49] {
        // E|X|³ over |X| < r with X uniform is r³/4.
        let oracle = simpson(|x| x.powi(3), 0.0, r, 1000) / r;
        let p = pmf(&s.ball_law(r).unwrap());
        assert!((p[1] - r.powi(3) / 4.0).abs() < 1e-15);
        assert!((p[1] - oracle).abs() < 1e-14);
    }
    let h = marginal_distance(&s, 0.5, Metric::Hellinger).unwrap().value;
    let closed = (1.0 - (1.0 - 1.0 / 32.0f64).sqrt()).sqrt();
    assert!((h - closed).abs() < 1e-14);
    assert!((h - 0.12549).abs() < 1e-5);
    let r: f64 = 1e-3;
    let h = marginal_distance(&s, r, Metric::Hellinger).unwrap().value;
    assert!((h / (r.powf(1.5) / 8f64.sqrt()) - 1.0).abs() < 1e-6);
}

#[test]
fn holder_family_closed_forms() {
    let k1 = DgpSpec::by_id("holder_boundary_k1").unwrap();
    let p = pmf(&k1.conditional_law(&[0.1]).unwrap());
    assert!((p[0] - 0.45).abs() < 1e-15 && (p[1] - 0.55).abs() < 1e-15);
    for r in [0.01, 0.2, 0.4] {
        let tv = marginal_distance(&k1, r, Metric::TotalVariation).unwrap().value;
        assert!((tv - 0.5 * r / 2.0).abs() < 1e-15);
    }
    let lin = DgpSpec::by_id("holder_interior_linear").unwrap();
    let quad = DgpSpec::by_id("holder_interior_quadratic").unwrap();
    for r in [0.01, 0.2, 0.4] {
        assert_eq!(pmf(&lin.ball_law(r).unwrap()), vec![0.5, 0.5]);
        assert_eq!(marginal_distance(&lin, r, Metric::TotalVariation).unwrap().value, 0.0);
        let tv = marginal_distance(&quad, r, Metric::TotalVariation).unwrap().value;
        assert!((tv - 0.8 * r * r / 3.0).abs() < 1e-15);
    }
}

#[test]
fn holder_rejects_invalid_probabilities() {
    let bad = HolderParams { c: 2.0, ..HolderParams::default() };
    assert!(DgpSpec::holder_two_point(bad).is_err());
    let bad = HolderParams { kappa: 2.5, ..HolderParams::default() };
    assert!(DgpSpec::holder_two_point(bad).is_err());
}

#[test]
fn registry_is_valid_and_round_trips() {
    for spec in DgpSpec::registry() {
        spec.validate().unwrap();
        let e = &spec.exponents;
        assert!(e.a_h > 0.0 && e.a_h <= e.a_tv && e.a_tv <= 2.0 * e.a_h, "{}", spec.id);
        let text = spec.to_json().unwrap();
        let back = DgpSpec::from_json(&text).unwrap();
        assert_eq!(back.to_json().unwrap(), text);
        let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in ["id", "d", "m", "x0", "family", "params", "regime", "exponents"] {
            assert!(doc.get(key).is_some(), "{} lacks {key}", spec.id);
        }
    }
}

#[test]
fn documents_with_inconsistent_metadata_are_rejected() {
    let spec = DgpSpec::by_id("cubic_support").unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&spec.to_json().unwrap()).unwrap();
    doc["exponents"]["a_tv"] = serde_json::json!(5.0);
    assert!(DgpSpec::from_json(&doc.to_string()).is_err());
    let mut doc: serde_json::Value = serde_json::from_str(&spec.to_json().unwrap()).unwrap();
    doc["regime"] = serde_json::json!({"kind": "holder", "kappa_s": 0, "kappa_r": 1.0});
    assert!(DgpSpec::from_json(&doc.to_string()).is_err());
}

#[test]
fn ball_laws_are_valid_and_shrink_to_the_point_law() {
    for spec in DgpSpec::registry() {
        let grid = geometric_grid(0.9 * spec.r_tilde().min(1.0), 10);
        let mut values = Vec::new();
        for &r in &grid {
            let law = spec.ball_law(r).unwrap();
            law.check().unwrap();
            if let ConditionalLaw::Discrete { pmf, .. } = &law {
                assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-10);
                assert!(pmf.iter().all(|p| (0.0..=1.0).contains(p)));
            }
            let h = marginal_distance(&spec, r, Metric::Hellinger).unwrap().value;
            assert!(h >= 0.0);
            values.push(h);
        }
        assert!(values.last().unwrap() <= &(values[0] * 0.05 + 1e-12), "{}: {values:?}", spec.id);
    }
}

#[test]
fn sampling_is_reproducible_and_validated() {
    let s = DgpSpec::by_id("holder_boundary_k05").unwrap();
    let a = s.sample(500, 42).unwrap();
    let b = s.sample(500, 42).unwrap();
    assert_eq!(a.x().iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.x().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    assert_eq!(a.y(), b.y());
    assert_ne!(s.sample(500, 43).unwrap().x(), a.x());
    assert!(s.sample(0, 1).is_err());
}

#[test]
fn uniform_covariate_mean() {
    let s = DgpSpec::gaussian_boundary(1, 1).unwrap();
    let n = 100_000;
    let data = s.sample(n, 11).unwrap();
    let mean = data.x().iter().sum::<f64>() / n as f64;
    let sd = (1.0 / 12.0 / n as f64).sqrt();
    assert!((mean - 0.5).abs() < 3.0 * sd);
}

#[test]
fn log_correction_ball_frequency_matches_quadrature() {
    let s = DgpSpec::by_id("log_correction").unwrap();
    let r = s.r_tilde() / 2.0;
    let data = s.sample(100_000, 5).unwrap();
    let inside: Vec<f64> = (0..data.n()).filter(|&i| data.x_row(i)[0].abs() < r).map(|i| data.y_row(i)[0]).collect();
    let freq = inside.iter().sum::<f64>() / inside.len() as f64;
    let p = 0.5 + mean_delta(r);
    let se = (p * (1.0 - p) / inside.len() as f64).sqrt();
    assert!((freq - p).abs() < 3.0 * se, "freq {freq}, oracle {p}, se {se}");
    assert!((s.ball_pi(r).unwrap() - p).abs() < 1e-12);
}

#[test]
fn disjoint_seeds_look_like_the_same_law() {
    // Two-sample KS at level 1e-4; the asymptotic critical value is
    // sqrt(−ln(α/2)/2) · sqrt(2/n).
    let s = DgpSpec::gaussian_boundary(1, 1).unwrap();
    let n = 1000;
    let crit = (-(1e-4f64 / 2.0).ln() / 2.0).sqrt() * (2.0 / n as f64).sqrt();
    let mut rejections = 0;
    for t in 0..100u64 {
        let mut a = s.sample(n, 2 * t).unwrap().y().to_vec();
        let mut b = s.sample(n, 2 * t + 1).unwrap().y().to_vec();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        let (mut i, mut j, mut d) = (0, 0, 0.0f64);
        while i < n && j < n {
            if a[i] <= b[j] {
                i += 1;
            } else {
                j += 1;
            }
            d = d.max((i as f64 - j as f64).abs() / n as f64);
        }
        if d > crit {
            rejections += 1;
        }
    }
    assert!(rejections <= 1, "{rejections} rejections out of 100");
}

#[test]
fn qmd_remainder_vanishes_faster_than_t_squared() {
    let s = DgpSpec::gaussian_boundary(1, 1).unwrap();
    let ratios: Vec<f64> = (3..=10).map(|j| {
        let t = 0.5f64.powi(j);
        qmd_remainder(&s, &[t]).unwrap() / (t * t)
    }).collect();
    assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
    assert!(ratios.last().unwrap() < &1e-5);
}
