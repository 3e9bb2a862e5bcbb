//! Log–log rate fitting for marginal and joint distances, the logarithmic
//! correction profile and the `k`-growth threshold study.

use log::info;
use rayon::prelude::*;
use serde::Serialize;

use crate::dgp::{DgpSpec, Family};
use crate::dist::{
    joint_distance_bound, joint_distance_exact, marginal_distance, DistanceEstimate, Method, Metric, MAX_EXACT_K,
};
use crate::error::{invalid, Error, Result};

/// Slope tolerance for closed-form and quadrature families.
pub const TAU_CLOSED_FORM: f64 = 0.05;
/// Slope tolerance where a mixture integral or Monte Carlo enters.
pub const TAU_MIXTURE: f64 = 0.10;

/// `r_j = r_max · 2^{−j}`, `j = 0..points`.
pub fn geometric_grid(r_max: f64, points: usize) -> Vec<f64> {
    (0..points).map(|j| r_max * 0.5f64.powi(j as i32)).collect()
}

/// `points` values from `lo` to `hi`, equally spaced in log scale.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points).map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp()).collect()
}

/// Ordinary least squares of `y` on `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub slope_stderr: f64,
}

pub fn ols(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return invalid("OLS needs at least two paired points");
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::Degenerate("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r_squared = if syy > 0.0 { (1.0 - sse / syy).clamp(0.0, 1.0) } else { 1.0 };
    let slope_stderr = if n > 2 { (sse / (nf - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(LineFit { slope, intercept, r_squared, slope_stderr })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Inconsistent,
    /// Too few non-zero distances to fit a slope.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    /// `(scale, distance)` pairs used in the fit.
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub slope_stderr: f64,
    /// Exponent the slope is compared against.
    pub theoretical: f64,
    /// Two-sided comparison when true, `slope ≥ theoretical − τ` otherwise.
    pub sharp: bool,
    pub tolerance: f64,
    pub verdict: Verdict,
    /// Zero distances dropped before the log transform.
    pub dropped: usize,
}

/// Minimum number of non-zero points a fit needs.
pub const MIN_FIT_POINTS: usize = 4;

/// Fits `log distance = intercept + slope · log scale` and classifies the
/// slope against `theoretical`.
pub fn fit_rate(points: &[(f64, f64)], theoretical: f64, sharp: bool, tolerance: f64) -> Result<RateFit> {
    if points.iter().any(|(s, d)| !(*s > 0.0) || !(*d >= 0.0) || !d.is_finite()) {
        return invalid("scales must be positive and distances finite and non-negative");
    }
    let kept: Vec<(f64, f64)> = points.iter().copied().filter(|(_, d)| *d > 0.0).collect();
    let dropped = points.len() - kept.len();
    if dropped > 0 {
        info!("dropped {dropped} zero distance(s) before the log-log fit");
    }
    let degenerate = |dropped| RateFit {
        points: kept.clone(),
        slope: f64::NAN,
        intercept: f64::NAN,
        r_squared: f64::NAN,
        slope_stderr: f64::NAN,
        theoretical,
        sharp,
        tolerance,
        verdict: Verdict::Degenerate,
        dropped,
    };
    if kept.len() < MIN_FIT_POINTS {
        return Ok(degenerate(dropped));
    }
    let x: Vec<f64> = kept.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = kept.iter().map(|p| p.1.ln()).collect();
    let line = match ols(&x, &y) {
        Ok(l) => l,
        Err(Error::Degenerate(_)) => return Ok(degenerate(dropped)),
        Err(e) => return Err(e),
    };
    let ok = if sharp {
        (line.slope - theoretical).abs() <= tolerance
    } else {
        line.slope >= theoretical - tolerance
    };
    Ok(RateFit {
        points: kept,
        slope: line.slope,
        intercept: line.intercept,
        r_squared: line.r_squared,
        slope_stderr: line.slope_stderr,
        theoretical,
        sharp,
        tolerance,
        verdict: if ok { Verdict::Consistent } else { Verdict::Inconsistent },
        dropped,
    })
}

/// One evaluated grid point, in the CSV schema `scale,n,k,distance,err,method`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRow {
    pub scale: f64,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub distance: f64,
    pub err: f64,
    pub method: Method,
}

impl RateRow {
    fn from_estimate(scale: f64, n: Option<usize>, k: Option<usize>, e: &DistanceEstimate) -> Self {
        Self { scale, n, k, distance: e.value, err: e.err, method: e.method }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateStudy {
    pub spec: String,
    pub metric: Metric,
    pub rows: Vec<RateRow>,
    pub fit: RateFit,
}

/// Exponent to compare against and whether it is sharp.
pub fn marginal_target(spec: &DgpSpec, metric: Metric) -> (f64, bool) {
    let e = &spec.exponents;
    let (sharp, guaranteed) = match metric {
        Metric::Hellinger => (e.sharp_a_h, e.a_h),
        Metric::TotalVariation => (e.sharp_a_tv, e.a_tv),
    };
    match sharp {
        Some(a) => (a, true),
        None => (guaranteed, false),
    }
}

/// Marginal distances `d(P_r, P)` over `r_grid` and their log–log fit.
pub fn marginal_rate_fit(spec: &DgpSpec, metric: Metric, r_grid: &[f64], tolerance: f64) -> Result<RateStudy> {
    if r_grid.len() < 6 {
        return invalid(format!("rate grids need at least 6 points, got {}", r_grid.len()));
    }
    let r_tilde = spec.r_tilde();
    if let Some(r) = r_grid.iter().find(|r| !(**r > 0.0 && **r < r_tilde)) {
        return invalid(format!("grid point {r} lies outside (0, {r_tilde})"));
    }
    let estimates: Vec<DistanceEstimate> =
        r_grid.par_iter().map(|&r| marginal_distance(spec, r, metric)).collect::<Result<_>>()?;
    let rows: Vec<RateRow> =
        r_grid.iter().zip(&estimates).map(|(r, e)| RateRow::from_estimate(*r, None, None, e)).collect();
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.scale, r.distance)).collect();
    let (theoretical, sharp) = marginal_target(spec, metric);
    let fit = fit_rate(&points, theoretical, sharp, tolerance)?;
    Ok(RateStudy { spec: spec.id.clone(), metric, rows, fit })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileRow {
    pub r: f64,
    pub tv: f64,
    /// `TV(P_r, P) · (1 − ln r) / r`.
    pub profile: f64,
    /// `(d(1 − 2^{−d−1})/(d+1)) · r / (1 − ln(r/2))`.
    pub lower_bound: f64,
}

/// Whether `TV = O(r^{1+ε})` is contradicted at the small end of the grid:
/// a local log–log slope below `1 + ε` there means `TV / r^{1+ε}` is
/// growing as `r` shrinks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonCheck {
    pub epsilon: f64,
    pub ratio_at_smallest_r: f64,
    pub ratio_at_largest_r: f64,
    /// Log–log slope between the two smallest radii.
    pub tail_slope: f64,
    pub bound_fails: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogProfile {
    pub spec: String,
    pub rows: Vec<ProfileRow>,
    pub profile_min: f64,
    pub profile_max: f64,
    pub bounded: bool,
    pub lower_bound_holds: bool,
    pub power_fit: RateFit,
    pub epsilon_checks: Vec<EpsilonCheck>,
}

/// Profile of the log-corrected TV rate on the log-correction family.
pub fn log_correction_profile(spec: &DgpSpec, r_grid: &[f64], epsilons: &[f64]) -> Result<LogProfile> {
    if !matches!(spec.family, Family::LogCorrection { .. }) {
        return invalid(format!("{} is not a log-correction family", spec.id));
    }
    if r_grid.len() < MIN_FIT_POINTS {
        return invalid("profile grid needs at least 4 points");
    }
    let d = spec.d as f64;
    let coef = d * (1.0 - 2f64.powf(-d - 1.0)) / (d + 1.0);
    let rows: Vec<ProfileRow> = r_grid
        .iter()
        .map(|&r| {
            let tv = marginal_distance(spec, r, Metric::TotalVariation)?.value;
            Ok(ProfileRow { r, tv, profile: tv * (1.0 - r.ln()) / r, lower_bound: coef * r / (1.0 - (r / 2.0).ln()) })
        })
        .collect::<Result<_>>()?;
    let profile_min = rows.iter().map(|r| r.profile).fold(f64::INFINITY, f64::min);
    let profile_max = rows.iter().map(|r| r.profile).fold(f64::NEG_INFINITY, f64::max);
    let bounded = profile_min > 0.0 && profile_max.is_finite();
    let lower_bound_holds = rows.iter().all(|r| r.tv >= r.lower_bound);
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.r, r.tv)).collect();
    let power_fit = fit_rate(&points, 1.0, false, TAU_CLOSED_FORM)?;
    let mut by_r: Vec<&ProfileRow> = rows.iter().collect();
    by_r.sort_by(|a, b| a.r.total_cmp(&b.r));
    let (small, next, large) = (by_r[0], by_r[1], by_r[by_r.len() - 1]);
    let tail_slope = (next.tv / small.tv).ln() / (next.r / small.r).ln();
    let epsilon_checks = epsilons
        .iter()
        .map(|&eps| EpsilonCheck {
            epsilon: eps,
            ratio_at_smallest_r: small.tv / small.r.powf(1.0 + eps),
            ratio_at_largest_r: large.tv / large.r.powf(1.0 + eps),
            tail_slope,
            bound_fails: tail_slope < 1.0 + eps,
        })
        .collect();
    Ok(LogProfile {
        spec: spec.id.clone(),
        rows,
        profile_min,
        profile_max,
        bounded,
        lower_bound_holds,
        power_fit,
        epsilon_checks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Exact,
    Bound,
}

/// The joint rate predicted from the marginal exponents at `(n, k)`:
/// `k^{1/2}(k/n)^{a_h/d}` for `H` and
/// `min{k (k/n)^{a_tv/d}, k^{1/2}(k/n)^{a_h/d}}` for `TV`.
pub fn joint_rate_expression(spec: &DgpSpec, metric: Metric, n: usize, k: usize) -> f64 {
    let (a_h, _) = marginal_target(spec, Metric::Hellinger);
    let (a_tv, _) = marginal_target(spec, Metric::TotalVariation);
    let d = spec.d as f64;
    let (kf, ratio) = (k as f64, k as f64 / n as f64);
    let h_rate = kf.sqrt() * ratio.powf(a_h / d);
    match metric {
        Metric::Hellinger => h_rate,
        Metric::TotalVariation => (kf * ratio.powf(a_tv / d)).min(h_rate),
    }
}

fn joint_estimate(spec: &DgpSpec, n: usize, k: usize, metric: Metric, engine: Engine) -> Result<DistanceEstimate> {
    match engine {
        Engine::Exact => joint_distance_exact(spec, n, k, metric),
        Engine::Bound => joint_distance_bound(spec, n, k, metric),
    }
}

/// `k = max(1, ⌊c · n^γ⌋)` for each `n`, capped at `n − 1`.
pub fn schedule(n_grid: &[usize], gamma: f64, c: f64) -> Vec<(usize, usize)> {
    n_grid
        .iter()
        .map(|&n| {
            let k = ((c * (n as f64).powf(gamma)).floor() as usize).clamp(1, n.saturating_sub(1).max(1));
            (n, k)
        })
        .collect()
}

/// Joint distances along a schedule, fitted against the predicted rate.
/// Each row's `scale` is the predicted rate at `(n, k)`.
pub fn joint_rate_fit(
    spec: &DgpSpec,
    metric: Metric,
    sched: &[(usize, usize)],
    engine: Engine,
    tolerance: f64,
) -> Result<RateStudy> {
    if sched.len() < MIN_FIT_POINTS {
        return invalid("joint schedules need at least 4 points");
    }
    if engine == Engine::Exact && !spec.is_discrete() {
        return Err(Error::Unsupported(format!("exact joint engine needs a discrete outcome; {} is continuous", spec.id)));
    }
    let estimates: Vec<DistanceEstimate> =
        sched.par_iter().map(|&(n, k)| joint_estimate(spec, n, k, metric, engine)).collect::<Result<_>>()?;
    let rows: Vec<RateRow> = sched
        .iter()
        .zip(&estimates)
        .map(|(&(n, k), e)| RateRow::from_estimate(joint_rate_expression(spec, metric, n, k), Some(n), Some(k), e))
        .collect();
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.scale, r.distance)).collect();
    let sharp = marginal_target(spec, Metric::Hellinger).1 && engine == Engine::Exact;
    let fit = fit_rate(&points, 1.0, sharp, tolerance)?;
    Ok(RateStudy { spec: spec.id.clone(), metric, rows, fit })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaSeries {
    pub gamma: f64,
    pub rows: Vec<RateRow>,
    /// `final < initial / 10` and a strictly decreasing tail.
    pub vanishing: bool,
    /// `γ < 2/(2+d) − 0.05`: vanishing is guaranteed and asserted.
    pub asserted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub spec: String,
    pub metric: Metric,
    /// `2 / (2 + d)`.
    pub threshold: f64,
    pub series: Vec<GammaSeries>,
    /// Every asserted series vanishes.
    pub passed: bool,
}

/// Whether a sequence vanishes: the last value is below a tenth of the
/// first and the last third (at least three values) strictly decreases.
pub fn is_vanishing(values: &[f64]) -> bool {
    if values.len() < 3 {
        return false;
    }
    let tail = values.len().div_ceil(3).max(3);
    let tail = &values[values.len() - tail..];
    values[values.len() - 1] < values[0] / 10.0 && tail.windows(2).all(|w| w[1] < w[0])
}

/// Joint distances along `k = ⌊n^γ⌋` for each `γ`, using the exact engine
/// where the outcome is discrete and `k` is small enough, the bound
/// otherwise.
pub fn growth_threshold_study(spec: &DgpSpec, metric: Metric, gammas: &[f64], n_grid: &[usize]) -> Result<ThresholdReport> {
    if n_grid.len() < 3 {
        return invalid("threshold study needs at least 3 sample sizes");
    }
    if gammas.iter().any(|g| !(*g > 0.0 && *g < 1.0)) {
        return invalid("gammas must lie in (0, 1)");
    }
    let threshold = 2.0 / (2.0 + spec.d as f64);
    let series: Vec<GammaSeries> = gammas
        .iter()
        .map(|&gamma| {
            let sched = schedule(n_grid, gamma, 1.0);
            let rows: Vec<RateRow> = sched
                .par_iter()
                .map(|&(n, k)| {
                    let engine = if spec.is_discrete() && k <= MAX_EXACT_K { Engine::Exact } else { Engine::Bound };
                    let e = joint_estimate(spec, n, k, metric, engine)?;
                    Ok(RateRow::from_estimate(joint_rate_expression(spec, metric, n, k), Some(n), Some(k), &e))
                })
                .collect::<Result<_>>()?;
            let values: Vec<f64> = rows.iter().map(|r| r.distance).collect();
            Ok(GammaSeries { gamma, vanishing: is_vanishing(&values), asserted: gamma < threshold - 0.05, rows })
        })
        .collect::<Result<_>>()?;
    let passed = series.iter().filter(|s| s.asserted).all(|s| s.vanishing);
    Ok(ThresholdReport { spec: spec.id.clone(), metric, threshold, series, passed })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticProfileRow {
    pub spec: String,
    pub boundary: bool,
    pub h: RateFit,
    pub tv: RateFit,
    /// Both slopes reach the quadratic rate `r²` within tolerance.
    pub quadratic: bool,
}

/// Marginal `H` and `TV` slopes of each spec, contrasting families with
/// the quadratic profile against boundary QMD families.
pub fn quadratic_profile_comparison(specs: &[DgpSpec], r_grid: &[f64], tolerance: f64) -> Result<Vec<QuadraticProfileRow>> {
    specs
        .iter()
        .map(|spec| {
            let h = marginal_rate_fit(spec, Metric::Hellinger, r_grid, tolerance)?.fit;
            let tv = marginal_rate_fit(spec, Metric::TotalVariation, r_grid, tolerance)?.fit;
            let quadratic = h.slope >= 2.0 - tolerance && tv.slope >= 2.0 - tolerance;
            Ok(QuadraticProfileRow { spec: spec.id.clone(), boundary: spec.boundary, h, tv, quadratic })
        })
        .collect()
}
