//! Radius law `F(r) = P(‖X − x0‖ ≤ r)`, the law of `R_(k+1)` and Beta
//! moments of uniform order statistics.

use crate::dgp::{DgpSpec, Geometry};
use crate::error::{invalid, Result};
use crate::quad::{integrate_vec_gk, QuadOptions};
use crate::special::{beta_pdf, ln_gamma_ratio, unit_ball_volume};

/// CDF of `R = ‖X − x0‖` with its small-radius sandwich
/// `C_L r^d ≤ F(r) ≤ C_H r^d` on `(0, r1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusLaw {
    pub geometry: Geometry,
    pub d: usize,
    /// Smallest radius with `F(r_max) = 1`.
    pub r_max: f64,
    /// `g(x0)`, the covariate density at `x0`.
    pub g_x0: f64,
    /// `C_{x0}`: `Vol(B_r ∩ X) ≥ C_{x0} r^d` for `r < r1`.
    pub c_x0: f64,
    pub c_l: f64,
    pub c_h: f64,
    pub r1: f64,
}

pub fn radius_law(spec: &DgpSpec) -> RadiusLaw {
    RadiusLaw::new(spec.geometry())
}

impl RadiusLaw {
    pub fn new(geometry: Geometry) -> Self {
        let (d, r_max, g_x0, c_x0, r_valid) = match geometry {
            Geometry::OrthantCube { d } => {
                (d, (d as f64).sqrt(), 1.0, unit_ball_volume(d) / 2f64.powi(d as i32), 1.0)
            }
            Geometry::CenteredBall { d, radius } => {
                let v = unit_ball_volume(d);
                (d, radius, 1.0 / (v * radius.powi(d as i32)), v, radius)
            }
            Geometry::HalfInterval { len } => (1, len, 1.0 / len, 1.0, len),
        };
        // The covariate density is constant near x0 in every registered
        // family, so the Lipschitz constant C_g is 0.
        let c_l = 0.5 * g_x0 * c_x0;
        let c_h = g_x0 * unit_ball_volume(d);
        Self { geometry, d, r_max, g_x0, c_x0, c_l, c_h, r1: r_valid.min(1.0) }
    }

    /// Radius up to which `F(r) = g(x0) C_{x0} r^d` holds exactly.
    fn power_radius(&self) -> f64 {
        match self.geometry {
            Geometry::OrthantCube { .. } => 1.0,
            _ => self.r_max,
        }
    }

    fn power_coef(&self) -> f64 {
        self.g_x0 * self.c_x0
    }

    pub fn cdf(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        if r >= self.r_max {
            return 1.0;
        }
        if r <= self.power_radius() {
            return (self.power_coef() * r.powi(self.d as i32)).min(1.0);
        }
        let Geometry::OrthantCube { d } = self.geometry else { unreachable!() };
        orthant_cdf(d, r)
    }

    /// `F′(r)`.
    pub fn pdf(&self, r: f64) -> f64 {
        if r <= 0.0 || r > self.r_max {
            return 0.0;
        }
        if r <= self.power_radius() {
            let d = self.d as f64;
            return self.power_coef() * d * r.powi(self.d as i32 - 1);
        }
        let Geometry::OrthantCube { d } = self.geometry else { unreachable!() };
        orthant_pdf(d, r)
    }

    /// `F⁻¹(u) = inf{r : F(r) ≥ u}`.
    pub fn quantile(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return self.r_max;
        }
        let split = self.cdf(self.power_radius());
        if u <= split {
            return (u / self.power_coef()).powf(1.0 / self.d as f64).min(self.power_radius());
        }
        // Newton steps guarded by a bracket on the region beyond the power
        // law, where F is strictly increasing and each F is a quadrature.
        let (mut lo, mut hi) = (self.power_radius(), self.r_max);
        let mut r = 0.5 * (lo + hi);
        for _ in 0..200 {
            let gap = self.cdf(r) - u;
            if gap < 0.0 {
                lo = r;
            } else {
                hi = r;
            }
            let slope = self.pdf(r);
            let step = if slope > 0.0 { r - gap / slope } else { f64::NAN };
            let next = if step > lo && step < hi { step } else { 0.5 * (lo + hi) };
            if (next - r).abs() <= 4.0 * f64::EPSILON * r || hi - lo <= 4.0 * f64::EPSILON * hi {
                return next;
            }
            r = next;
        }
        r
    }
}

/// `P(‖U‖ ≤ r)` for `U ~ U[0,1]^d`.
fn orthant_cdf(d: usize, r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    if r * r >= d as f64 {
        return 1.0;
    }
    if d == 1 {
        return r.min(1.0);
    }
    if r <= 1.0 {
        return unit_ball_volume(d) / 2f64.powi(d as i32) * r.powi(d as i32);
    }
    if d == 2 {
        let a = (1.0 / r).acos();
        return (r * r - 1.0).sqrt() + r * r * (std::f64::consts::FRAC_PI_4 - a);
    }
    let opts = QuadOptions::default().with_abs_tol(1e-14).with_panels(2);
    let inner = |t: f64| orthant_cdf(d - 1, (r * r - t * t).max(0.0).sqrt());
    kinked_integral(inner, d, r, 1.0, &opts)
}

/// `∫_0^upper f` split where `√(r² − t²)` crosses an integer, the points at
/// which the lower-dimensional law changes closed form.
fn kinked_integral(f: impl Fn(f64) -> f64, d: usize, r: f64, upper: f64, opts: &QuadOptions) -> f64 {
    let mut cuts: Vec<f64> = (1..d)
        .filter_map(|j| {
            let t2 = r * r - j as f64;
            (t2 > 0.0 && t2.sqrt() < upper).then(|| t2.sqrt())
        })
        .collect();
    cuts.push(0.0);
    cuts.push(upper);
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2).map(|w| integrate_vec_gk(|t, out| out[0] = f(t), 1, w[0], w[1], opts).value[0]).sum()
}

fn orthant_pdf(d: usize, r: f64) -> f64 {
    if r <= 0.0 || r * r >= d as f64 {
        return 0.0;
    }
    if d == 1 {
        return if r <= 1.0 { 1.0 } else { 0.0 };
    }
    if r <= 1.0 {
        return unit_ball_volume(d) / 2f64.powi(d as i32) * d as f64 * r.powi(d as i32 - 1);
    }
    if d == 2 {
        return 2.0 * r * (std::f64::consts::FRAC_PI_4 - (1.0 / r).acos());
    }
    // d/dr ∫_0^1 F_{d−1}(√(r² − t²)) dt with the integrand differentiated.
    let opts = QuadOptions::default().with_abs_tol(1e-13).with_panels(2);
    let inner = |t: f64| {
        let s = (r * r - t * t).max(0.0).sqrt();
        if s <= 0.0 {
            0.0
        } else {
            orthant_pdf(d - 1, s) * r / s
        }
    };
    kinked_integral(inner, d, r, 1.0f64.min(r), &opts)
}

/// Density of `R_(k+1)`, the `(k+1)`-th smallest distance to `x0` among `n`.
#[derive(Debug, Clone, Copy)]
pub struct OrderRadiusDensity {
    pub law: RadiusLaw,
    pub n: usize,
    pub k: usize,
}

impl OrderRadiusDensity {
    /// `U = F(R_(k+1)) ~ Beta(k+1, n−k)`.
    pub fn beta_params(&self) -> (f64, f64) {
        ((self.k + 1) as f64, (self.n - self.k) as f64)
    }

    pub fn pdf(&self, r: f64) -> f64 {
        let fr = self.law.pdf(r);
        if fr == 0.0 {
            return 0.0;
        }
        let (a, b) = self.beta_params();
        beta_pdf(self.law.cdf(r), a, b) * fr
    }
}

pub fn r_order_density(spec: &DgpSpec, n: usize, k: usize) -> Result<OrderRadiusDensity> {
    if k == 0 || k >= n {
        return invalid(format!("R_(k+1) needs 1 ≤ k < n, got k={k}, n={n}"));
    }
    Ok(OrderRadiusDensity { law: radius_law(spec), n, k })
}

/// `E[U_(k:n)^m]` for the `k`-th order statistic of `n` uniforms.
pub fn uniform_order_moment(m: f64, k: usize, n: usize) -> Result<f64> {
    if !(m > 0.0 && m.is_finite()) {
        return invalid(format!("moment order must be positive, got {m}"));
    }
    if k == 0 || k > n {
        return invalid(format!("need 1 ≤ k ≤ n, got k={k}, n={n}"));
    }
    let (k, n) = (k as f64, n as f64);
    Ok((ln_gamma_ratio(k, m) - ln_gamma_ratio(n + 1.0, m)).exp())
}
