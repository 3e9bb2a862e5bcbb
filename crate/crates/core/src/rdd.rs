//! Cramér–von Mises permutation test for covariate balance at a
//! regression-discontinuity cutoff, the `q`-growth rule and size/power
//! simulation.
//!
//! The statistic only depends on which entries of `S_n` are labelled left,
//! so the permutation distribution is taken over the `C(k, k/2)` left/right
//! splits. It is evaluated in integer form: with `h = k/2` and `c⁻_j`, `c⁺_j`
//! the left and right counts `≤ S_nj`, `T = Σ_j (c⁻_j − c⁺_j)² / (k h²)`.
//! Comparisons against the observed value are therefore exact.

use log::warn;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::dgp::DgpSpec;
use crate::error::{invalid, Error, Result};
use crate::ios::extract_two_sided;
use crate::rng::{stream_rng, StreamRng};

/// Default cap on the number of splits enumerated exactly.
pub const DEFAULT_MAX_EXACT: u64 = 200_000;
/// Default number of random permutations when enumeration is too large.
pub const DEFAULT_N_RANDOM: usize = 9_999;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermTestResult {
    pub statistic: f64,
    pub p_value: f64,
    /// Permutations compared against the observed split, excluding it.
    pub n_perms: usize,
    /// Full enumeration of the splits rather than random sampling.
    pub exact: bool,
    pub q: usize,
    pub alpha: f64,
    pub reject: bool,
}

/// Pooled outcomes sorted once; every split is then scored in `O(k)`.
struct Pooled {
    /// Positions of `S_n` in increasing order of value.
    order: Vec<usize>,
    /// Exclusive end (in `order`) of the tie group containing each slot.
    group_end: Vec<usize>,
    k: usize,
}

impl Pooled {
    fn new(s_n: &[f64]) -> Self {
        let k = s_n.len();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|a, b| s_n[*a].total_cmp(&s_n[*b]));
        let mut group_end = vec![k; k];
        let mut start = 0;
        for i in 1..=k {
            if i == k || s_n[order[i]] != s_n[order[start]] {
                group_end[start..i].fill(i);
                start = i;
            }
        }
        Self { order, group_end, k }
    }

    /// `Σ_j (c⁻_j − c⁺_j)²` for the split where `left[pos]` marks the left
    /// block.
    fn score(&self, left: &[bool]) -> u64 {
        let mut gap: i64 = 0;
        let mut total: u64 = 0;
        let mut i = 0;
        while i < self.k {
            let end = self.group_end[i];
            for &pos in &self.order[i..end] {
                gap += if left[pos] { 1 } else { -1 };
            }
            total += (end - i) as u64 * (gap * gap) as u64;
            i = end;
        }
        total
    }

    fn scale(&self) -> f64 {
        let h = (self.k / 2) as f64;
        self.k as f64 * h * h
    }
}

fn check_sample(s_n: &[f64]) -> Result<()> {
    if s_n.len() < 2 || s_n.len() % 2 != 0 {
        return invalid(format!("the CvM statistic needs an even k ≥ 2, got k = {}", s_n.len()));
    }
    if s_n.iter().any(|v| !v.is_finite()) {
        return invalid("outcomes must be finite");
    }
    Ok(())
}

fn observed_split(k: usize) -> Vec<bool> {
    (0..k).map(|j| j < k / 2).collect()
}

/// `T(S_n) = (1/k) Σ_j (F̂⁻(S_nj) − F̂⁺(S_nj))²` with the left ECDF built from
/// the first `k/2` entries and the right ECDF from the last `k/2`.
pub fn cvm_statistic(s_n: &[f64]) -> Result<f64> {
    check_sample(s_n)?;
    let pooled = Pooled::new(s_n);
    Ok(pooled.score(&observed_split(s_n.len())) as f64 / pooled.scale())
}

/// `C(k, h)` when it fits in `u64`.
fn choose(k: u64, h: u64) -> Option<u64> {
    let mut acc: u128 = 1;
    for i in 0..h {
        acc = acc * (k - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// Permutation test of equal left/right laws. Splits are enumerated exactly
/// when there are at most `max_exact` of them, otherwise `n_random` uniform
/// splits are drawn. The p-value is `(1 + #{T(S^π) ≥ T_obs}) / (1 + N)`,
/// with the observed split as the added one.
pub fn permutation_test(s_n: &[f64], alpha: f64, max_exact: u64, n_random: usize, seed: u64) -> Result<PermTestResult> {
    permutation_test_with(s_n, alpha, max_exact, n_random, &mut stream_rng(seed, 0))
}

/// As [`permutation_test`], drawing random splits from `rng`.
pub fn permutation_test_with(
    s_n: &[f64],
    alpha: f64,
    max_exact: u64,
    n_random: usize,
    rng: &mut StreamRng,
) -> Result<PermTestResult> {
    check_sample(s_n)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return invalid(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    let k = s_n.len();
    let h = k / 2;
    let pooled = Pooled::new(s_n);
    let mut left = observed_split(k);
    let observed = pooled.score(&left);
    let splits = if k <= 64 { choose(k as u64, h as u64) } else { None };
    let (exceed, n_perms, exact) = match splits {
        Some(c) if c <= max_exact => {
            // Gosper's hack walks every h-subset of k bits; the observed
            // split is the lowest h bits, counted by the add-one term.
            let mut exceed = 0usize;
            let mut set: u64 = (1u64 << h) - 1;
            for _ in 1..c {
                let low = set & set.wrapping_neg();
                let ripple = set + low;
                set = (((ripple ^ set) >> 2) / low) | ripple;
                for (j, l) in left.iter_mut().enumerate() {
                    *l = set >> j & 1 == 1;
                }
                if pooled.score(&left) >= observed {
                    exceed += 1;
                }
            }
            (exceed, (c - 1) as usize, true)
        }
        _ => {
            if n_random == 0 {
                return invalid("random permutation mode needs n_random ≥ 1");
            }
            let mut idx: Vec<usize> = (0..k).collect();
            let mut exceed = 0usize;
            for _ in 0..n_random {
                for i in 0..h {
                    let j = rng.random_range(i..k);
                    idx.swap(i, j);
                }
                left.fill(false);
                for &p in &idx[..h] {
                    left[p] = true;
                }
                if pooled.score(&left) >= observed {
                    exceed += 1;
                }
            }
            (exceed, n_random, false)
        }
    };
    let p_value = (1 + exceed) as f64 / (1 + n_perms) as f64;
    Ok(PermTestResult {
        statistic: observed as f64 / pooled.scale(),
        p_value,
        n_perms,
        exact,
        q: h,
        alpha,
        reject: p_value <= alpha,
    })
}

/// Neighbours per side, `q = max(2, ⌊c n^γ⌋)`. Growth at or beyond `n^{2/3}`
/// is allowed for demonstration but logged as invalid.
pub fn q_rule(n: usize, gamma: f64, c: f64) -> usize {
    if gamma >= 2.0 / 3.0 {
        warn!("q growth exponent {gamma} is not below 2/3; the permutation test is not asymptotically valid");
    }
    let raw = c * (n as f64).powf(gamma);
    if raw.is_finite() && raw >= 2.0 {
        raw.floor() as usize
    } else {
        2
    }
}

/// Settings of the per-replication permutation test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PermSettings {
    pub max_exact: u64,
    pub n_random: usize,
}

impl Default for PermSettings {
    fn default() -> Self {
        Self { max_exact: DEFAULT_MAX_EXACT, n_random: DEFAULT_N_RANDOM }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationRow {
    pub rep: usize,
    pub statistic: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub left: String,
    pub right: String,
    pub n: usize,
    pub gamma: f64,
    pub c: f64,
    pub q: usize,
    pub alpha: f64,
    pub reps: usize,
    /// Replications without `q` points on some side.
    pub dropped: usize,
    pub rejection_rate: f64,
    /// Binomial standard error of `rejection_rate`.
    pub std_error: f64,
    pub rows: Vec<SimulationRow>,
}

impl SimulationReport {
    /// Share of completed replications with `p ≤ level`.
    pub fn rate_at(&self, level: f64) -> f64 {
        if self.rows.is_empty() {
            return f64::NAN;
        }
        self.rows.iter().filter(|r| r.p_value <= level).count() as f64 / self.rows.len() as f64
    }
}

fn check_side(spec: &DgpSpec, side: &str) -> Result<()> {
    if spec.d != 1 || spec.m != 1 {
        return invalid(format!("{side} spec {} must have d = 1 and a scalar outcome", spec.id));
    }
    Ok(())
}

/// `n` observations around a cutoff at 0. Each one picks a side with
/// probability 1/2, draws from that side's spec and is placed at signed
/// distance `∓|x − x0|`, left negative.
pub fn two_sided_sample(left: &DgpSpec, right: &DgpSpec, n: usize, rng: &mut StreamRng) -> Result<Dataset> {
    check_side(left, "left")?;
    check_side(right, "right")?;
    if n == 0 {
        return invalid("sample size must be at least 1");
    }
    let mut xs = vec![0.0; n];
    let mut ys = vec![0.0; n];
    let (mut x, mut y) = ([0.0], [0.0]);
    for i in 0..n {
        let is_left = rng.random::<bool>();
        let spec = if is_left { left } else { right };
        spec.draw(rng, &mut x, &mut y);
        let dist = (x[0] - spec.x0[0]).abs();
        xs[i] = if is_left { -dist } else { dist };
        ys[i] = y[0];
    }
    Dataset::new(1, 1, xs, ys)
}

/// Rejection rate of the permutation test over `reps` two-sided datasets.
/// Identical specs give a size estimate, different ones a power estimate.
#[allow(clippy::too_many_arguments)]
pub fn size_power_simulation(
    left: &DgpSpec,
    right: &DgpSpec,
    n: usize,
    gamma: f64,
    c: f64,
    reps: usize,
    alpha: f64,
    seed: u64,
) -> Result<SimulationReport> {
    size_power_simulation_with(left, right, n, gamma, c, reps, alpha, seed, PermSettings::default())
}

/// As [`size_power_simulation`] with explicit permutation settings.
/// Replication `i` uses stream `i` for both the data and the permutations.
#[allow(clippy::too_many_arguments)]
pub fn size_power_simulation_with(
    left: &DgpSpec,
    right: &DgpSpec,
    n: usize,
    gamma: f64,
    c: f64,
    reps: usize,
    alpha: f64,
    seed: u64,
    perms: PermSettings,
) -> Result<SimulationReport> {
    check_side(left, "left")?;
    check_side(right, "right")?;
    if reps == 0 {
        return invalid("reps must be at least 1");
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return invalid(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    if !(c > 0.0) {
        return invalid("c must be positive");
    }
    let q = q_rule(n, gamma, c);
    let outcomes: Vec<Option<SimulationRow>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = stream_rng(seed, rep as u64);
            let data = two_sided_sample(left, right, n, &mut rng)?;
            let ios = match extract_two_sided(&data, 0.0, q) {
                Ok(ios) => ios,
                Err(Error::InvalidArgument(_)) => return Ok(None),
                Err(e) => return Err(e),
            };
            let t = permutation_test_with(&ios.s_n, alpha, perms.max_exact, perms.n_random, &mut rng)?;
            Ok(Some(SimulationRow { rep, statistic: t.statistic, p_value: t.p_value }))
        })
        .collect::<Result<_>>()?;
    let dropped = outcomes.iter().filter(|o| o.is_none()).count();
    if dropped > 0 {
        warn!("{dropped} replication(s) lacked q = {q} points on a side and were dropped");
    }
    let rows: Vec<SimulationRow> = outcomes.into_iter().flatten().collect();
    let done = rows.len() as f64;
    let rejections = rows.iter().filter(|r| r.p_value <= alpha).count() as f64;
    let (rejection_rate, std_error) = if rows.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        let p = rejections / done;
        (p, (p * (1.0 - p) / done).sqrt())
    };
    Ok(SimulationReport {
        left: left.id.clone(),
        right: right.id.clone(),
        n,
        gamma,
        c,
        q,
        alpha,
        reps,
        dropped,
        rejection_rate,
        std_error,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example_statistic() {
        assert_eq!(cvm_statistic(&[0.0, 1.0, 3.0, 8.0]).unwrap(), 0.375);
    }

    #[test]
    fn identical_halves_give_zero() {
        assert_eq!(cvm_statistic(&[2.0, 5.0, 2.0, 5.0]).unwrap(), 0.0);
    }

    #[test]
    fn odd_length_rejected() {
        assert!(cvm_statistic(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn constant_outcomes_never_reject() {
        let t = permutation_test(&[4.0; 6], 0.05, DEFAULT_MAX_EXACT, DEFAULT_N_RANDOM, 1).unwrap();
        assert_eq!(t.statistic, 0.0);
        assert_eq!(t.p_value, 1.0);
        assert!(t.exact);
        assert_eq!(t.n_perms, 19);
    }

    #[test]
    fn q_rule_examples() {
        assert_eq!(q_rule(1_000_000, 0.6, 1.0), 3981);
        assert_eq!(q_rule(100, 1e-9, 1.0), 2);
    }

    #[test]
    fn choose_small_values() {
        assert_eq!(choose(4, 2), Some(6));
        assert_eq!(choose(20, 10), Some(184_756));
        assert_eq!(choose(88, 44), None);
    }
}
