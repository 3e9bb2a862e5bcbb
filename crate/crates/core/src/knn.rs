//! IOS-based estimators `ψ(S_n)` of conditional functionals and their
//! normal-approximation diagnostics.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dgp::{ConditionalLaw, DgpSpec};
use crate::dist::{joint_distance_bound, Metric};
use crate::error::{invalid, Error, Result};
use crate::ios::extract;
use crate::rng::stream_rng;
use crate::special::norm_cdf;

/// Calibration constant of the `c/√k` term in the normal-approximation
/// budget, the Berry–Esseen size of a symmetric binomial lattice.
pub const BUDGET_C: f64 = 0.4;

/// Componentwise mean of the `k` rows of `s_n` (row-major, `m` per row).
pub fn mean_estimator(s_n: &[f64], m: usize) -> Result<Vec<f64>> {
    if m == 0 || s_n.is_empty() || s_n.len() % m != 0 {
        return invalid("mean estimator needs a non-empty k × m sample");
    }
    let k = s_n.len() / m;
    let mut out = vec![0.0; m];
    for row in s_n.chunks_exact(m) {
        out.iter_mut().zip(row).for_each(|(o, v)| *o += v);
    }
    out.iter_mut().for_each(|o| *o /= k as f64);
    Ok(out)
}

/// Empirical CDF `#{S_nj ≤ t} / k`.
pub fn cdf_estimator(s_n: &[f64], t: f64) -> Result<f64> {
    if s_n.is_empty() {
        return invalid("CDF estimator needs a non-empty sample");
    }
    Ok(s_n.iter().filter(|v| **v <= t).count() as f64 / s_n.len() as f64)
}

/// Left-continuous generalised inverse `inf{s : F̂(s) ≥ τ}`.
pub fn quantile_estimator(s_n: &[f64], tau: f64) -> Result<f64> {
    if !(tau > 0.0 && tau < 1.0) {
        return invalid(format!("tau must lie in (0, 1), got {tau}"));
    }
    if s_n.is_empty() {
        return invalid("quantile estimator needs a non-empty sample");
    }
    let k = s_n.len();
    let mut sorted = s_n.to_vec();
    sorted.sort_by(f64::total_cmp);
    // Smallest j with j / k ≥ τ, evaluated as the ECDF itself would be.
    let mut j = ((tau * k as f64).ceil() as usize).clamp(1, k);
    while j > 1 && (j - 1) as f64 / k as f64 >= tau {
        j -= 1;
    }
    while j < k && (j as f64 / k as f64) < tau {
        j += 1;
    }
    Ok(sorted[j - 1])
}

/// Functional estimated from the scalar (first) outcome coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "at", rename_all = "snake_case")]
pub enum Statistic {
    Mean,
    Cdf(f64),
    Quantile(f64),
}

impl FromStr for Statistic {
    type Err = Error;

    /// Parses `mean`, `cdf:<t>` or `quantile:<τ>`.
    fn from_str(s: &str) -> Result<Self> {
        let parse = |v: &str| v.trim().parse::<f64>().map_err(|_| Error::InvalidArgument(format!("bad number in {s:?}")));
        match s.split_once(':') {
            None if s.trim() == "mean" => Ok(Statistic::Mean),
            Some(("cdf", v)) => Ok(Statistic::Cdf(parse(v)?)),
            Some(("quantile", v)) => {
                let tau = parse(v)?;
                if !(tau > 0.0 && tau < 1.0) {
                    return invalid(format!("tau must lie in (0, 1), got {tau}"));
                }
                Ok(Statistic::Quantile(tau))
            }
            _ => invalid(format!("unknown statistic {s:?}; expected mean, cdf:<t> or quantile:<tau>")),
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statistic::Mean => write!(f, "mean"),
            Statistic::Cdf(t) => write!(f, "cdf:{t}"),
            Statistic::Quantile(tau) => write!(f, "quantile:{tau}"),
        }
    }
}

impl Statistic {
    /// `ψ(S_n)`; the mean keeps all `m` coordinates, the others use the first.
    pub fn evaluate(&self, s_n: &[f64], m: usize) -> Result<Vec<f64>> {
        match *self {
            Statistic::Mean => mean_estimator(s_n, m),
            Statistic::Cdf(t) => Ok(vec![cdf_estimator(&first_coordinate(s_n, m), t)?]),
            Statistic::Quantile(tau) => Ok(vec![quantile_estimator(&first_coordinate(s_n, m), tau)?]),
        }
    }
}

fn first_coordinate(s_n: &[f64], m: usize) -> Vec<f64> {
    s_n.iter().step_by(m.max(1)).copied().collect()
}

/// Target `θ(P)` and asymptotic standard deviation of the first coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetOracle {
    pub target: Vec<f64>,
    pub sigma: f64,
}

/// `θ(P)` and `σ` from the conditional law at `x0`.
pub fn target_oracle(spec: &DgpSpec, stat: Statistic) -> Result<TargetOracle> {
    let law = spec.conditional_law(&spec.x0)?;
    match (&law, stat) {
        (ConditionalLaw::Discrete { support, pmf }, Statistic::Mean) => {
            let mean: f64 = support.iter().zip(pmf).map(|(s, p)| s * p).sum();
            let var: f64 = support.iter().zip(pmf).map(|(s, p)| (s - mean).powi(2) * p).sum();
            Ok(TargetOracle { target: vec![mean], sigma: var.max(0.0).sqrt() })
        }
        (ConditionalLaw::Discrete { support, pmf }, Statistic::Cdf(t)) => {
            let theta: f64 = support.iter().zip(pmf).filter(|(s, _)| **s <= t).map(|(_, p)| p).sum();
            let theta = theta.clamp(0.0, 1.0);
            Ok(TargetOracle { target: vec![theta], sigma: (theta * (1.0 - theta)).sqrt() })
        }
        (ConditionalLaw::GaussianLocation { mean }, Statistic::Mean) => {
            Ok(TargetOracle { target: mean.clone(), sigma: 1.0 })
        }
        (ConditionalLaw::GaussianLocation { mean }, Statistic::Cdf(t)) => {
            let theta = norm_cdf(t - mean[0]);
            Ok(TargetOracle { target: vec![theta], sigma: (theta * (1.0 - theta)).sqrt() })
        }
        _ => Err(Error::Unsupported(format!("no variance oracle for {stat} on {}", spec.id))),
    }
}

/// Kolmogorov–Smirnov distance of `draws` to the standard normal CDF.
pub fn ks_to_normal(draws: &[f64]) -> f64 {
    let mut z = draws.to_vec();
    z.sort_by(f64::total_cmp);
    let r = z.len() as f64;
    z.iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = norm_cdf(v);
            ((i + 1) as f64 / r - f).max(f - i as f64 / r)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorReport {
    pub spec: String,
    pub statistic: Statistic,
    pub n: usize,
    pub k: usize,
    pub reps: usize,
    /// `ψ(S_n)` averaged over replications.
    pub estimate: Vec<f64>,
    pub target: Vec<f64>,
    pub sigma: f64,
    /// `σ = 0`: standardisation is undefined and no KS distance is reported.
    pub degenerate: bool,
    /// `√k (ψ(S_n) − θ(P)) / σ` per replication, first coordinate.
    pub standardized_draws: Option<Vec<f64>>,
    pub ks_distance: Option<f64>,
    /// Upper bound on `TV(L(S_n), P^k)`.
    pub tv_bound: Option<f64>,
    /// `tv_bound + c/√k`, the budget the KS distance is read against.
    pub budget: Option<f64>,
}

/// `reps` draws of `ψ(S_n)` at `spec.x0`, one stream per replication.
fn simulate_estimates(spec: &DgpSpec, stat: Statistic, n: usize, k: usize, reps: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if k == 0 || k > n {
        return invalid(format!("k must lie in 1..={n}, got {k}"));
    }
    if reps == 0 {
        return invalid("reps must be at least 1");
    }
    (0..reps)
        .into_par_iter()
        .map(|rep| {
            let data = spec.sample_with(n, &mut stream_rng(seed, rep as u64))?;
            let ios = extract(&data, &spec.x0, k)?;
            stat.evaluate(&ios.s_n, spec.m)
        })
        .collect()
}

/// Simulates the standardised estimator and reports its KS distance to the
/// standard normal next to the coupling budget.
pub fn normality_diagnostic(
    spec: &DgpSpec,
    stat: Statistic,
    n: usize,
    k: usize,
    reps: usize,
    seed: u64,
) -> Result<EstimatorReport> {
    let oracle = target_oracle(spec, stat)?;
    let estimates = simulate_estimates(spec, stat, n, k, reps, seed)?;
    let dim = oracle.target.len();
    let mut estimate = vec![0.0; dim];
    for e in &estimates {
        estimate.iter_mut().zip(e).for_each(|(a, v)| *a += v / reps as f64);
    }
    let degenerate = !(oracle.sigma > 0.0);
    let (draws, ks) = if degenerate {
        (None, None)
    } else {
        let scale = (k as f64).sqrt() / oracle.sigma;
        let z: Vec<f64> = estimates.iter().map(|e| scale * (e[0] - oracle.target[0])).collect();
        let ks = ks_to_normal(&z);
        (Some(z), Some(ks))
    };
    let tv_bound = if k < n { joint_distance_bound(spec, n, k, Metric::TotalVariation).ok().map(|e| e.value) } else { None };
    let budget = tv_bound.map(|b| b + BUDGET_C / (k as f64).sqrt());
    Ok(EstimatorReport {
        spec: spec.id.clone(),
        statistic: stat,
        n,
        k,
        reps,
        estimate,
        target: oracle.target,
        sigma: oracle.sigma,
        degenerate,
        standardized_draws: draws,
        ks_distance: ks,
        tv_bound,
        budget,
    })
}

/// Monte Carlo MSE of a bounded estimator against the coupling budget
/// `2 · (i.i.d. k-sample MSE) + 8 B² · TV`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseBudget {
    pub n: usize,
    pub k: usize,
    pub mse: f64,
    /// Monte Carlo standard error of `mse`.
    pub mse_se: f64,
    pub oracle_mse: f64,
    pub bound: f64,
    pub tv_bound: f64,
    pub budget: f64,
    /// `mse ≤ budget + 3 · mse_se`.
    pub holds: bool,
}

/// MSE budget of the mean estimator on a discrete spec, where `|ψ| ≤ B` with
/// `B` the largest absolute support point.
pub fn mse_budget(spec: &DgpSpec, n: usize, k: usize, reps: usize, seed: u64) -> Result<MseBudget> {
    let bound = match spec.conditional_law(&spec.x0)? {
        ConditionalLaw::Discrete { support, .. } => support.iter().fold(0.0f64, |a, s| a.max(s.abs())),
        _ => return Err(Error::Unsupported(format!("{} has an unbounded outcome", spec.id))),
    };
    let oracle = target_oracle(spec, Statistic::Mean)?;
    let theta = oracle.target[0];
    let estimates = simulate_estimates(spec, Statistic::Mean, n, k, reps, seed)?;
    let sq: Vec<f64> = estimates.iter().map(|e| (e[0] - theta).powi(2)).collect();
    let r = reps as f64;
    let mse = sq.iter().sum::<f64>() / r;
    let var = if reps > 1 { sq.iter().map(|v| (v - mse).powi(2)).sum::<f64>() / (r - 1.0) } else { 0.0 };
    let mse_se = (var / r).sqrt();
    let oracle_mse = oracle.sigma * oracle.sigma / k as f64;
    let tv_bound = joint_distance_bound(spec, n, k, Metric::TotalVariation)?.value;
    let budget = 2.0 * oracle_mse + 8.0 * bound * bound * tv_bound;
    Ok(MseBudget { n, k, mse, mse_se, oracle_mse, bound, tv_bound, budget, holds: mse <= budget + 3.0 * mse_se })
}
