//! Hellinger and total-variation distances.
//!
//! Conventions: `H²(P, Q) = ½∫(√p − √q)² dν` (so `H ∈ [0, 1]`) and
//! `TV(P, Q) = ½∫|p − q| dν`; with these, `H² ≤ TV ≤ √2 H`.
//!
//! Besides distances between two [`ConditionalLaw`]s, the module computes the
//! distance between the joint law of `S_n` and the i.i.d. benchmark `P^k`.
//! Conditionally on `R_(k+1) = r`, `S_n` is an i.i.d. sample from `P_r`, so
//! `L(S_n) = ∫ P_r^k dL(R_(k+1))(r)`. For two-point outcomes the law of a
//! configuration depends only on its number of ones, which reduces the
//! `2^k` configurations to `k + 1` counts.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dgp::{ConditionalLaw, Density1d, DgpSpec, Score};
use crate::error::{invalid, Error, Result};
use crate::ordstat::radius_law;
use crate::quad::{integrate, integrate_vec_gk, QuadOptions};
use crate::special::{beta_pdf, norm_cdf, norm_pdf, norm_quantile, BinomialTable};

/// Largest `k` accepted by [`joint_distance_exact`].
pub const MAX_EXACT_K: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[derive(clap::ValueEnum)]
pub enum Metric {
    #[serde(rename = "h", alias = "hellinger")]
    #[value(name = "h", alias = "hellinger")]
    Hellinger,
    #[serde(rename = "tv", alias = "total_variation")]
    #[value(name = "tv", alias = "total_variation")]
    TotalVariation,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Hellinger => "h",
            Metric::TotalVariation => "tv",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Quadrature,
    ExchangeableEnumeration,
    MonteCarlo,
    UpperBound,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::ClosedForm => "closed_form",
            Method::Quadrature => "quadrature",
            Method::ExchangeableEnumeration => "exchangeable_enumeration",
            Method::MonteCarlo => "monte_carlo",
            Method::UpperBound => "upper_bound",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceEstimate {
    /// `H` (not `H²`) for the Hellinger metric.
    pub value: f64,
    pub metric: Metric,
    pub method: Method,
    /// Bound on the numerical error of `value`.
    pub err: f64,
    pub detail: String,
}

/// A distance in its natural additive form: `H²` for Hellinger, `TV` for
/// total variation, with an error bound on that quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Raw {
    value: f64,
    err: f64,
    method: Method,
}

impl Raw {
    fn finish(self, metric: Metric, detail: impl Into<String>) -> DistanceEstimate {
        let v = self.value.clamp(0.0, 1.0);
        let (value, err) = match metric {
            Metric::TotalVariation => (v, self.err),
            Metric::Hellinger => {
                let h = v.sqrt();
                // δ(√x) ≤ δx / (2√x), and never more than √δx.
                let err = if h > 0.0 { (self.err / (2.0 * h)).min(self.err.sqrt()) } else { self.err.sqrt() };
                (h, err)
            }
        };
        DistanceEstimate { value, metric, method: self.method, err, detail: detail.into() }
    }
}

/// `½(√a − √b)²` computed as `½((a − b)/(√a + √b))²`.
fn half_sq_root_diff(a: f64, b: f64) -> f64 {
    let s = a.sqrt() + b.sqrt();
    if s == 0.0 {
        0.0
    } else {
        let t = (a - b) / s;
        0.5 * t * t
    }
}

/// `H²` between Bernoulli(`pi0 + delta`) and Bernoulli(`pi0`) without
/// cancellation in `delta`.
pub fn h2_two_point(pi0: f64, delta: f64) -> f64 {
    let p1 = pi0 + delta;
    let a = pi0.sqrt() + p1.max(0.0).sqrt();
    let b = (1.0 - pi0).sqrt() + (1.0 - p1).max(0.0).sqrt();
    let t1 = if a > 0.0 { delta / a } else { 0.0 };
    let t2 = if b > 0.0 { delta / b } else { 0.0 };
    0.5 * (t1 * t1 + t2 * t2)
}

/// 1-D density distance, integrated after the substitution
/// `y = center + Φ⁻¹(u)` that maps Gaussian tails onto `(0, 1)`.
fn density_raw(p: &dyn Fn(f64) -> f64, q: &dyn Fn(f64) -> f64, center: f64, metric: Metric, tol: f64) -> Raw {
    let integrand = |u: f64| {
        if u <= 0.0 || u >= 1.0 {
            return 0.0;
        }
        let z = norm_quantile(u);
        let w = norm_pdf(z);
        if !z.is_finite() || w <= 0.0 {
            return 0.0;
        }
        let (pv, qv) = (p(center + z), q(center + z));
        let v = match metric {
            Metric::Hellinger => half_sq_root_diff(pv, qv),
            Metric::TotalVariation => 0.5 * (pv - qv).abs(),
        };
        v / w
    };
    let opts = QuadOptions::default().with_abs_tol(1e-15).with_rel_tol(1e-10).with_panels(16);
    let res = integrate(integrand, 0.0, 1.0, &opts);
    let mut err = res.err + tol;
    if !res.converged {
        err += res.value.abs() * 1e-6;
    }
    Raw { value: res.value, err, method: Method::Quadrature }
}

fn gaussian_density(mean: f64) -> impl Fn(f64) -> f64 {
    move |y| norm_pdf(y - mean)
}

fn raw_distance(p: &ConditionalLaw, q: &ConditionalLaw, metric: Metric) -> Result<Raw> {
    use ConditionalLaw::*;
    match (p, q) {
        (Discrete { support: sp, pmf: pp }, Discrete { support: sq, pmf: pq }) => {
            if sp != sq {
                return Err(Error::MismatchedSupport(format!("{sp:?} vs {sq:?}")));
            }
            let value = match metric {
                Metric::Hellinger => pp.iter().zip(pq).map(|(a, b)| half_sq_root_diff(*a, *b)).sum(),
                Metric::TotalVariation => 0.5 * pp.iter().zip(pq).map(|(a, b)| (a - b).abs()).sum::<f64>(),
            };
            Ok(Raw { value, err: 4.0 * f64::EPSILON * pp.len() as f64, method: Method::ClosedForm })
        }
        (GaussianLocation { mean: a }, GaussianLocation { mean: b }) => {
            if a.len() != b.len() {
                return Err(Error::MismatchedSupport(format!("dimensions {} vs {}", a.len(), b.len())));
            }
            let delta2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
            let value = match metric {
                Metric::Hellinger => -(-delta2 / 8.0).exp_m1(),
                // 2Φ(Δ/2) − 1, written to avoid cancellation for small Δ.
                Metric::TotalVariation => 1.0 - 2.0 * norm_cdf(-0.5 * delta2.sqrt()),
            };
            Ok(Raw { value, err: 4.0 * f64::EPSILON, method: Method::ClosedForm })
        }
        (Density1d(a), Density1d(b)) => density_pair(a, b, metric),
        (Density1d(a), GaussianLocation { mean }) | (GaussianLocation { mean }, Density1d(a)) => {
            if mean.len() != a.rest_mean.len() + 1 {
                return Err(Error::MismatchedSupport("outcome dimensions differ".into()));
            }
            let mut g = crate::dgp::Density1d::new(gaussian_density(mean[0]), f64::NEG_INFINITY, f64::INFINITY, mean[0], 0.0);
            g.rest_mean = mean[1..].to_vec();
            density_pair(a, &g, metric)
        }
        _ => Err(Error::MismatchedSupport("discrete and continuous laws cannot be compared".into())),
    }
}

fn density_pair(a: &Density1d, b: &Density1d, metric: Metric) -> Result<Raw> {
    if a.rest_mean.len() != b.rest_mean.len() {
        return Err(Error::MismatchedSupport("outcome dimensions differ".into()));
    }
    if a.rest_mean != b.rest_mean {
        return Err(Error::Unsupported("densities that differ beyond the first coordinate".into()));
    }
    let pa = |y: f64| a.pdf(y);
    let pb = |y: f64| b.pdf(y);
    let center = 0.5 * (a.center + b.center);
    Ok(density_raw(&pa, &pb, center, metric, a.tol + b.tol))
}

pub fn distance(p: &ConditionalLaw, q: &ConditionalLaw, metric: Metric) -> Result<DistanceEstimate> {
    let raw = raw_distance(p, q, metric)?;
    Ok(raw.finish(metric, format!("{metric} between two laws")))
}

pub fn hellinger(p: &ConditionalLaw, q: &ConditionalLaw) -> Result<DistanceEstimate> {
    distance(p, q, Metric::Hellinger)
}

pub fn total_variation(p: &ConditionalLaw, q: &ConditionalLaw) -> Result<DistanceEstimate> {
    distance(p, q, Metric::TotalVariation)
}

/// `H²(P^k, Q^k) = 1 − (1 − H²(P, Q))^k`.
pub fn tensorize_hellinger(h2_marginal: f64, k: usize) -> f64 {
    let h2 = h2_marginal.clamp(0.0, 1.0);
    if h2 == 0.0 {
        return 0.0;
    }
    if h2 == 1.0 {
        return 1.0;
    }
    -(k as f64 * (-h2).ln_1p()).exp_m1()
}

/// Marginal distance in additive form (`H²` or `TV`) between `P_r` and `P`.
fn marginal_raw(spec: &DgpSpec, r: f64, metric: Metric) -> Result<Raw> {
    if spec.is_discrete() {
        let pi0 = spec.pi0()?;
        let delta = spec.ball_pi_excess(r)?;
        let value = match metric {
            Metric::Hellinger => h2_two_point(pi0, delta),
            Metric::TotalVariation => delta.abs(),
        };
        return Ok(Raw { value, err: 1e-15 + 1e-12 * value, method: Method::ClosedForm });
    }
    let pr = spec.ball_law(r)?;
    let p0 = spec.conditional_law(&spec.x0)?;
    raw_distance(&pr, &p0, metric)
}

/// `H(P_r, P)` or `TV(P_r, P)`.
pub fn marginal_distance(spec: &DgpSpec, r: f64, metric: Metric) -> Result<DistanceEstimate> {
    let raw = marginal_raw(spec, r, metric)?;
    Ok(raw.finish(metric, format!("{metric}(P_r, P) for {} at r={r}", spec.id)))
}

/// Writes `Binom(j; k, p0 + delta) − Binom(j; k, p0)` for all `j`, computed
/// as `Binom(j; k, p0)·expm1(log ratio)` where both laws have mass.
fn binom_diff_into(table: &BinomialTable, p0: f64, delta: f64, out: &mut [f64]) {
    let k = table.trials();
    let p1 = (p0 + delta).clamp(0.0, 1.0);
    out.iter_mut().for_each(|v| *v = 0.0);
    if delta == 0.0 {
        return;
    }
    if p0 <= 0.0 || p0 >= 1.0 || p1 <= 0.0 || p1 >= 1.0 {
        let mut a = vec![0.0; k + 1];
        table.pmf_into(p1, &mut a);
        let mut b = vec![0.0; k + 1];
        table.pmf_into(p0, &mut b);
        for j in 0..=k {
            out[j] = a[j] - b[j];
        }
        if p0 <= 0.0 {
            out[0] = (k as f64 * (-p1).ln_1p()).exp_m1();
        } else if p0 >= 1.0 {
            out[k] = (k as f64 * (p1 - 1.0).ln_1p()).exp_m1();
        }
        return;
    }
    let kf = k as f64;
    let (plo, phi) = (p0.min(p1), p0.max(p1));
    let lo = (kf * plo - 40.0 * (kf * plo * (1.0 - plo)).sqrt() - 40.0).floor().max(0.0) as usize;
    let hi = ((kf * phi + 40.0 * (kf * phi * (1.0 - phi)).sqrt() + 40.0).ceil() as usize).min(k);
    let (lp, lq) = (p0.ln(), (-p0).ln_1p());
    let (rp, rq) = ((delta / p0).ln_1p(), (-delta / (1.0 - p0)).ln_1p());
    for j in lo..=hi {
        let jf = j as f64;
        let lb = table.ln_coef(j) + jf * lp + (kf - jf) * lq;
        let e = jf * rp + (kf - jf) * rq;
        if lb + e.max(0.0) > -745.0 {
            out[j] = lb.exp() * e.exp_m1();
        }
    }
}

/// Standardised coordinates for `U = F(R_(k+1)) ~ Beta(k+1, n−k)`: the
/// mixture integrals run over `z = (u − μ)/σ ∈ [z_lo, z_hi]`, which keeps the
/// weight `σ·beta_pdf(μ + σz)` of order one whatever the sample size.
#[derive(Debug, Clone, Copy)]
struct BetaWindow {
    alpha: f64,
    beta: f64,
    mean: f64,
    sd: f64,
    z_lo: f64,
    z_hi: f64,
    /// Log Beta density at the mean.
    ln_peak: f64,
}

impl BetaWindow {
    fn new(n: usize, k: usize) -> Self {
        let (a, b) = ((k + 1) as f64, (n - k) as f64);
        let mean = a / (a + b);
        let sd = (a * b / ((a + b) * (a + b) * (a + b + 1.0))).sqrt();
        let z_lo = (-mean / sd).max(-40.0);
        let z_hi = ((1.0 - mean) / sd).min(40.0);
        let ln_peak = (a - 1.0) * mean.ln() + (b - 1.0) * (-mean).ln_1p() - crate::special::ln_beta(a, b);
        Self { alpha: a, beta: b, mean, sd, z_lo, z_hi, ln_peak }
    }

    /// `(u, weight)` at standardised coordinate `z`. The log-density is
    /// expanded around the mean so that rounding of `u` is not amplified by
    /// the large exponent `n − k − 1`.
    fn at(&self, z: f64) -> (f64, f64) {
        let u = self.mean + self.sd * z;
        if u <= 0.0 || u >= 1.0 {
            return (u.clamp(0.0, 1.0), self.sd * beta_pdf(u.clamp(0.0, 1.0), self.alpha, self.beta));
        }
        let step = self.sd * z;
        let ln_w = self.ln_peak
            + (self.alpha - 1.0) * (step / self.mean).ln_1p()
            + (self.beta - 1.0) * (-step / (1.0 - self.mean)).ln_1p();
        (u, self.sd * ln_w.exp())
    }
}

fn check_nk(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        return invalid(format!("need 1 ≤ k ≤ n, got n={n}, k={k}"));
    }
    Ok(())
}

/// Count-domain joint law: `A_j − B_j` where `A_j = P(S_n has j ones)` and
/// `B_j = Binom(j; k, π(x0))`.
pub struct JointCounts {
    pub b: Vec<f64>,
    pub diff: Vec<f64>,
    /// Per-component quadrature error bound on `diff`.
    pub err: f64,
}

/// Count-domain law of `S_n` against `P^k` for a two-point spec.
pub fn joint_counts(spec: &DgpSpec, n: usize, k: usize) -> Result<JointCounts> {
    check_nk(n, k)?;
    if !spec.is_discrete() {
        return Err(Error::Unsupported(format!("exact joint engine needs a discrete outcome; {} is continuous", spec.id)));
    }
    if k > MAX_EXACT_K {
        return invalid(format!("k = {k} exceeds the exact enumeration limit {MAX_EXACT_K}"));
    }
    let law = radius_law(spec);
    let pi0 = spec.pi0()?;
    let table = BinomialTable::new(k);
    let mut b = vec![0.0; k + 1];
    table.pmf_into(pi0, &mut b);
    if k == n {
        let mut diff = vec![0.0; k + 1];
        binom_diff_into(&table, pi0, spec.ball_pi_excess(law.r_max)?, &mut diff);
        return Ok(JointCounts { b, diff, err: 1e-14 });
    }
    let win = BetaWindow::new(n, k);
    let mut failure = None;
    let integrand = |z: f64, out: &mut [f64]| {
        let (u, w) = win.at(z);
        if w == 0.0 || failure.is_some() {
            return;
        }
        let r = law.quantile(u);
        let delta = if r > 0.0 {
            match spec.ball_pi_excess(r) {
                Ok(v) => v,
                Err(e) => {
                    failure = Some(e);
                    return;
                }
            }
        } else {
            0.0
        };
        binom_diff_into(&table, pi0, delta, &mut out[..=k]);
        out[..=k].iter_mut().for_each(|v| *v *= w);
        out[k + 1] = w;
    };
    let opts = QuadOptions::default().with_abs_tol(1e-13).with_rel_tol(1e-12).with_panels(16);
    let res = integrate_vec_gk(integrand, k + 2, win.z_lo, win.z_hi, &opts);
    if let Some(e) = failure {
        return Err(e);
    }
    // Normalising by the computed mass removes any error in the Beta
    // normalising constant: A_j − B_j = ∫(Binom_r − B_j) w / ∫w.
    let mass = res.value[k + 1];
    let quad_err = res.err.iter().take(k + 1).fold(0.0f64, |m, v| m.max(*v));
    let mut err = (quad_err + res.err[k + 1]) / mass;
    if !res.converged {
        err += 1e-8;
    }
    let mut diff = res.value;
    diff.truncate(k + 1);
    diff.iter_mut().for_each(|v| *v /= mass);
    Ok(JointCounts { b, diff, err })
}

impl JointCounts {
    fn raw(&self, metric: Metric) -> Raw {
        let mut value = 0.0;
        let mut err = 0.0;
        for (bj, dj) in self.b.iter().zip(&self.diff) {
            let aj = (bj + dj).max(0.0);
            match metric {
                Metric::Hellinger => {
                    let s = aj.sqrt() + bj.sqrt();
                    if s > 0.0 {
                        let t = dj / s;
                        value += 0.5 * t * t;
                        err += t.abs() * self.err / s.max(self.err.sqrt());
                    }
                }
                Metric::TotalVariation => {
                    value += 0.5 * dj.abs();
                    err += 0.5 * self.err;
                }
            }
        }
        Raw { value, err: err + self.err, method: Method::ExchangeableEnumeration }
    }
}

/// Exact `H(L(S_n), P^k)` or `TV(L(S_n), P^k)` for two-point outcomes.
pub fn joint_distance_exact(spec: &DgpSpec, n: usize, k: usize, metric: Metric) -> Result<DistanceEstimate> {
    let counts = joint_counts(spec, n, k)?;
    Ok(counts.raw(metric).finish(metric, format!("exact joint {metric} for {} at n={n}, k={k}", spec.id)))
}

/// Upper bound on the joint distance from marginal distances:
/// `H² ≤ ∫(1 − (1 − H²(P_r, P))^k) dL(R_(k+1))` and
/// `TV ≤ ∫ min(1, k·TV(P_r, P)) dL(R_(k+1))`. Radii where `P_r` is not
/// available contribute the trivial bound 1.
pub fn joint_distance_bound(spec: &DgpSpec, n: usize, k: usize, metric: Metric) -> Result<DistanceEstimate> {
    check_nk(n, k)?;
    let law = radius_law(spec);
    let kernel = |raw: f64| match metric {
        Metric::Hellinger => tensorize_hellinger(raw, k),
        Metric::TotalVariation => (k as f64 * raw).min(1.0),
    };
    let detail = format!("joint {metric} bound for {} at n={n}, k={k}", spec.id);
    if k == n {
        let raw = marginal_raw(spec, law.r_max, metric)?;
        let value = kernel(raw.value);
        return Ok(Raw { value, err: k as f64 * raw.err, method: Method::UpperBound }.finish(metric, detail));
    }
    let win = BetaWindow::new(n, k);
    let mut inner_err = 0.0f64;
    let mut failure = None;
    let integrand = |z: f64, out: &mut [f64]| {
        let (u, w) = win.at(z);
        out[1] = w;
        let r = law.quantile(u);
        if w == 0.0 || r <= 0.0 {
            return;
        }
        out[0] = match marginal_raw(spec, r, metric) {
            Ok(raw) => {
                inner_err = inner_err.max(k as f64 * raw.err);
                w * kernel(raw.value)
            }
            Err(Error::Unsupported(_)) => w,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        };
    };
    let opts = QuadOptions::default().with_abs_tol(1e-12).with_rel_tol(1e-10).with_panels(16);
    let res = integrate_vec_gk(integrand, 2, win.z_lo, win.z_hi, &opts);
    if let Some(e) = failure {
        return Err(e);
    }
    let mass = res.value[1];
    let value = res.value[0] / mass;
    let err = (res.err[0] + res.err[1]) / mass;
    Ok(Raw { value, err: err + inner_err, method: Method::UpperBound }.finish(metric, detail))
}

/// One row of [`local_expansion_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionRow {
    pub t: Vec<f64>,
    /// `D(x0 + t) = ∫(√p_{x0+t} − √p_{x0})² dν = 2H²`.
    pub d: f64,
    /// `¼ tᵀ I(x0) t`.
    pub quadratic: f64,
    /// `d / quadratic`, absent when the quadratic term vanishes.
    pub ratio: Option<f64>,
}

fn qmd_score(spec: &DgpSpec) -> Result<Score> {
    match spec.score {
        Some(s) if matches!(spec.regime, crate::dgp::Regime::Qmd) => Ok(s),
        _ => Err(Error::Unsupported(format!("{} is not registered as a QMD family with a score", spec.id))),
    }
}

/// Compares `D(x0 + t)` with the quadratic term of its local expansion.
pub fn local_expansion_check(spec: &DgpSpec, t_grid: &[Vec<f64>]) -> Result<Vec<ExpansionRow>> {
    let score = qmd_score(spec)?;
    let p0 = spec.conditional_law(&spec.x0)?;
    t_grid
        .iter()
        .map(|t| {
            if t.len() != spec.d {
                return invalid(format!("offset has length {}, expected {}", t.len(), spec.d));
            }
            let x: Vec<f64> = spec.x0.iter().zip(t).map(|(a, b)| a + b).collect();
            let px = spec.conditional_law(&x)?;
            let d = 2.0 * raw_distance(&px, &p0, Metric::Hellinger)?.value;
            let quadratic = match score {
                Score::GaussianFirstCoordinate => 0.25 * t[0] * t[0],
                Score::Zero => 0.0,
            };
            let ratio = (quadratic > 0.0).then(|| d / quadratic);
            Ok(ExpansionRow { t: t.clone(), d, quadratic, ratio })
        })
        .collect()
}

/// `∫(√p_{x0+t} − √p_{x0} − ½ tᵀℓ̇ √p_{x0})² dν`, the remainder of the QMD
/// expansion.
pub fn qmd_remainder(spec: &DgpSpec, t: &[f64]) -> Result<f64> {
    let score = qmd_score(spec)?;
    if t.len() != spec.d {
        return invalid(format!("offset has length {}, expected {}", t.len(), spec.d));
    }
    let x: Vec<f64> = spec.x0.iter().zip(t).map(|(a, b)| a + b).collect();
    match (spec.conditional_law(&x)?, spec.conditional_law(&spec.x0)?, score) {
        (ConditionalLaw::Discrete { pmf: px, .. }, ConditionalLaw::Discrete { pmf: p0, .. }, Score::Zero) => {
            Ok(px.iter().zip(&p0).map(|(a, b)| 2.0 * half_sq_root_diff(*a, *b)).sum())
        }
        (ConditionalLaw::GaussianLocation { mean: mx }, ConditionalLaw::GaussianLocation { mean: m0 }, s) => {
            let slope = if s == Score::GaussianFirstCoordinate { 0.5 * t[0] } else { 0.0 };
            let (c0, c1) = (m0[0], mx[0]);
            let integrand = |u: f64| {
                if u <= 0.0 || u >= 1.0 {
                    return 0.0;
                }
                let z = norm_quantile(u);
                let w = norm_pdf(z);
                if !z.is_finite() || w <= 0.0 {
                    return 0.0;
                }
                let y = c0 + z;
                let s0 = w.sqrt();
                let v = norm_pdf(y - c1).sqrt() - s0 - slope * (y - c0) * s0;
                v * v / w
            };
            let opts = QuadOptions::default().with_abs_tol(1e-18).with_rel_tol(1e-10).with_panels(16);
            Ok(integrate(integrand, 0.0, 1.0, &opts).value)
        }
        _ => Err(Error::Unsupported(format!("QMD remainder for {}", spec.id))),
    }
}
