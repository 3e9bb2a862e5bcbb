//! The handful of special functions the rate computations need: log-Gamma,
//! Beta densities, binomial weights and the standard normal CDF/quantile.

use std::f64::consts::{PI, SQRT_2};

use statrs::function::erf::{erfc, erfc_inv};

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// `lnΓ(x + m) − lnΓ(x)` without the cancellation of two large log-Gammas.
pub fn ln_gamma_ratio(x: f64, m: f64) -> f64 {
    // Stirling correction lnΓ(y) − (y − ½)ln y + y − ½ln 2π, valid for y ≥ 20.
    fn corr(y: f64) -> f64 {
        let y2 = y * y;
        (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - 1.0 / (1680.0 * y2)) / y2) / y2) / y
    }
    let shift = (20.0 - x).max(0.0).ceil() as usize;
    let lower: f64 = (0..shift).map(|i| (m / (x + i as f64)).ln_1p()).sum();
    let y = x + shift as f64;
    (y - 0.5) * (m / y).ln_1p() + m * (y + m).ln() - m + corr(y + m) - corr(y) - lower
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// `ln C(n, k)`.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Beta(a, b) density at `u`, zero outside `[0, 1]`.
pub fn beta_pdf(u: f64, a: f64, b: f64) -> f64 {
    if !(0.0..=1.0).contains(&u) {
        return 0.0;
    }
    if u == 0.0 {
        return if a < 1.0 {
            f64::INFINITY
        } else if a == 1.0 {
            b
        } else {
            0.0
        };
    }
    if u == 1.0 {
        return if b < 1.0 {
            f64::INFINITY
        } else if b == 1.0 {
            a
        } else {
            0.0
        };
    }
    ((a - 1.0) * u.ln() + (b - 1.0) * (-u).ln_1p() - ln_beta(a, b)).exp()
}

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal CDF, accurate in both tails.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Standard normal quantile; `±∞` at the endpoints.
pub fn norm_quantile(u: f64) -> f64 {
    if u <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if u >= 1.0 {
        return f64::INFINITY;
    }
    let x = -SQRT_2 * erfc_inv(2.0 * u);
    // One Newton step against the tail-accurate CDF.
    let (c, dens) = if x < 0.0 { (norm_cdf(x) - u, norm_pdf(x)) } else { ((1.0 - u) - norm_cdf(-x), norm_pdf(x)) };
    if dens > 0.0 && c.is_finite() {
        x - c / dens
    } else {
        x
    }
}

/// Volume of the Euclidean unit ball in `d` dimensions.
pub fn unit_ball_volume(d: usize) -> f64 {
    // V_d = (2π/d) V_{d−2}, V_0 = 1, V_1 = 2.
    let mut v = if d % 2 == 0 { 1.0 } else { 2.0 };
    let mut j = if d % 2 == 0 { 2 } else { 3 };
    while j <= d {
        v *= 2.0 * PI / j as f64;
        j += 2;
    }
    v
}

/// Precomputed `ln C(k, j)` for `j = 0..=k`, used to evaluate many binomial
/// pmfs with the same number of trials.
#[derive(Debug, Clone)]
pub struct BinomialTable {
    k: usize,
    ln_coef: Vec<f64>,
}

impl BinomialTable {
    pub fn new(k: usize) -> Self {
        let ln_coef = (0..=k).map(|j| ln_choose(k as u64, j as u64)).collect();
        Self { k, ln_coef }
    }

    pub fn trials(&self) -> usize {
        self.k
    }

    /// `ln C(k, j)`.
    pub fn ln_coef(&self, j: usize) -> f64 {
        self.ln_coef[j]
    }

    /// Writes Binomial(k, p) probabilities into `out` (length `k + 1`).
    /// Entries below `exp(-745)` are left at zero.
    pub fn pmf_into(&self, p: f64, out: &mut [f64]) {
        let k = self.k;
        out.iter_mut().for_each(|v| *v = 0.0);
        if p <= 0.0 {
            out[0] = 1.0;
            return;
        }
        if p >= 1.0 {
            out[k] = 1.0;
            return;
        }
        let lp = p.ln();
        let lq = (-p).ln_1p();
        let kf = k as f64;
        let sd = (kf * p * (1.0 - p)).sqrt();
        let centre = kf * p;
        let lo = (centre - 40.0 * sd - 40.0).floor().max(0.0) as usize;
        let hi = ((centre + 40.0 * sd + 40.0).ceil() as usize).min(k);
        for j in lo..=hi {
            let lv = self.ln_coef[j] + j as f64 * lp + (k - j) as f64 * lq;
            if lv > -745.0 {
                out[j] = lv.exp();
            }
        }
    }
}
