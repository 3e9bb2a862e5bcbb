//! Registry of data-generating processes with exact conditional laws.
//!
//! Every family here is small enough that `P_x` (the law of `Y` given
//! `X = x`) and `P_r` (the law of `Y` given `‖X − x0‖ ≤ r`) are available in
//! closed form or through a one-dimensional quadrature. The two-point
//! families put `Y ∈ {0, 1}` and are described by `π(x) = P(Y = 1 | X = x)`.
//!
//! | id                          | covariate law        | x0     | outcome                         |
//! |-----------------------------|----------------------|--------|---------------------------------|
//! | `gaussian_boundary`         | `U[0,1]^d`           | 0      | `N((x_1,0,..,0), I_m)`          |
//! | `gaussian_interior`         | `U[0,1]`             | 1/2    | `N((x_1,0,..,0), I_m)`          |
//! | `log_correction`            | `U(B_r̃)`             | 0      | `π = 1/2 + δ(‖x‖)`              |
//! | `cubic_support`             | `U(−r̃, r̃)`           | 0      | `π = |x|³`                      |
//! | `holder_boundary_*`         | `U[0, r̃]`            | 0      | `π = b + c x^κ`                 |
//! | `holder_interior_*`         | `U(−r̃, r̃)`           | 0      | `π = b + c x + c₂ |x|^κ`        |

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{invalid, Error, Result};
use crate::quad::{integrate, GaussLegendre, QuadOptions};
use crate::rng::{stream_rng, StreamRng};

/// `δ(u) = u / (1 − ln u)` on `(0, e^{-2})`, zero elsewhere.
pub fn log_correction_delta(u: f64) -> f64 {
    if u > 0.0 && u < (-2.0f64).exp() {
        u / (1.0 - u.ln())
    } else {
        0.0
    }
}

/// Parameters of the two-point Hölder family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HolderParams {
    /// Smoothness order `κ = κ_s + κ_r ∈ (0, 2]`.
    pub kappa: f64,
    /// Boundary: coefficient of `x^κ`. Interior: coefficient of the linear term.
    pub c: f64,
    /// Interior only: coefficient of `|x|^κ`.
    pub c2: f64,
    /// `π(x0)`.
    pub base: f64,
    pub r_tilde: f64,
    pub interior: bool,
    /// Interior only: include the `c·x` term.
    pub with_linear_term: bool,
}

impl Default for HolderParams {
    fn default() -> Self {
        Self { kappa: 1.0, c: 0.5, c2: 0.0, base: 0.5, r_tilde: 0.5, interior: false, with_linear_term: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    GaussianBoundary {},
    GaussianInterior {},
    LogCorrection { r_tilde: f64 },
    CubicSupport { r_tilde: f64 },
    HolderTwoPoint(HolderParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Regime {
    Qmd,
    Holder { kappa_s: u32, kappa_r: f64 },
}

/// Marginal rate exponents: `H(P_r, P) = O(r^a_h)`, `TV(P_r, P) = O(r^a_tv)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exponents {
    /// Exponent guaranteed by the smoothness regime.
    pub a_h: f64,
    pub a_tv: f64,
    /// Exponent the family attains exactly, when known. Rate fits compare
    /// two-sidedly against these and one-sidedly against the guarantees.
    pub sharp_a_h: Option<f64>,
    pub sharp_a_tv: Option<f64>,
    /// The distance carries a slowly varying logarithmic factor.
    pub log_correction: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OutcomeKind {
    Discrete { support: Vec<f64> },
    GaussianLocation,
}

/// Score `ℓ̇_{x0}` of a QMD family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Score {
    /// `ℓ̇(y) = (y_1, 0, .., 0)`.
    GaussianFirstCoordinate,
    Zero,
}

/// Support of `X` and its position relative to `x0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    /// `U[0,1]^d` with `x0` at the origin corner.
    OrthantCube { d: usize },
    /// Uniform on the ball of radius `radius` around `x0`.
    CenteredBall { d: usize, radius: f64 },
    /// `U[0, len]` with `x0 = 0` (one dimension).
    HalfInterval { len: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DgpSpec {
    pub id: String,
    pub d: usize,
    pub m: usize,
    pub x0: Vec<f64>,
    pub boundary: bool,
    pub outcome: OutcomeKind,
    pub family: Family,
    pub regime: Regime,
    pub exponents: Exponents,
    pub score: Option<Score>,
}

/// A conditional law of `Y`.
#[derive(Clone)]
pub enum ConditionalLaw {
    /// Finite support with probabilities.
    Discrete { support: Vec<f64>, pmf: Vec<f64> },
    /// `N(mean, I_m)`.
    GaussianLocation { mean: Vec<f64> },
    /// Quadrature-backed density of the first coordinate; the remaining
    /// coordinates are `N(rest_mean, I)` and independent of it.
    Density1d(Density1d),
}

impl fmt::Debug for ConditionalLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConditionalLaw::Discrete { support, pmf } => {
                f.debug_struct("Discrete").field("support", support).field("pmf", pmf).finish()
            }
            ConditionalLaw::GaussianLocation { mean } => f.debug_struct("GaussianLocation").field("mean", mean).finish(),
            ConditionalLaw::Density1d(d) => d.fmt(f),
        }
    }
}

#[derive(Clone)]
pub struct Density1d {
    pdf: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub lo: f64,
    pub hi: f64,
    /// Location used when transforming Gaussian tails through `Φ`.
    pub center: f64,
    /// Accuracy of `pdf` itself.
    pub tol: f64,
    pub rest_mean: Vec<f64>,
}

impl fmt::Debug for Density1d {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Density1d")
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("center", &self.center)
            .field("tol", &self.tol)
            .finish_non_exhaustive()
    }
}

impl Density1d {
    pub fn new(pdf: impl Fn(f64) -> f64 + Send + Sync + 'static, lo: f64, hi: f64, center: f64, tol: f64) -> Self {
        Self { pdf: Arc::new(pdf), lo, hi, center, tol, rest_mean: Vec::new() }
    }

    pub fn pdf(&self, y: f64) -> f64 {
        if y < self.lo || y > self.hi {
            0.0
        } else {
            (self.pdf)(y)
        }
    }

    /// Mixture of `N(center + s, 1)` over shifts `s` with the given weights.
    pub fn gaussian_shift_mixture(center: f64, shifts: Vec<(f64, f64)>, rest_mean: Vec<f64>) -> Self {
        let pdf = move |y: f64| shifts.iter().map(|(s, w)| w * crate::special::norm_pdf(y - center - s)).sum();
        Self {
            pdf: Arc::new(pdf),
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
            center,
            tol: 1e-14,
            rest_mean,
        }
    }
}

impl ConditionalLaw {
    pub fn two_point(pi: f64) -> Self {
        ConditionalLaw::Discrete { support: vec![0.0, 1.0], pmf: vec![1.0 - pi, pi] }
    }

    /// Validates the representation invariants.
    pub fn check(&self) -> Result<()> {
        match self {
            ConditionalLaw::Discrete { support, pmf } => {
                if support.len() != pmf.len() || pmf.is_empty() {
                    return invalid("support and pmf lengths differ");
                }
                if pmf.iter().any(|p| !(0.0..=1.0).contains(p)) {
                    return invalid("pmf entries must lie in [0, 1]");
                }
                let s: f64 = pmf.iter().sum();
                if (s - 1.0).abs() > 1e-12 {
                    return invalid(format!("pmf sums to {s}"));
                }
                Ok(())
            }
            ConditionalLaw::GaussianLocation { mean } => {
                if mean.is_empty() || mean.iter().any(|v| !v.is_finite()) {
                    return invalid("gaussian mean must be a finite non-empty vector");
                }
                Ok(())
            }
            ConditionalLaw::Density1d(_) => Ok(()),
        }
    }
}

/// Gauss–Legendre rule for the first-coordinate offset `X_1 − x0_1` given
/// `X ∈ B_r ∩ [0,1]^d` with `r ≤ 1`. The offset is `r sin θ` with density
/// proportional to `cos^d θ` on `[0, π/2]`.
fn orthant_shift_rule(d: usize, r: f64) -> Vec<(f64, f64)> {
    let gl = GaussLegendre::n32();
    let half = std::f64::consts::FRAC_PI_4;
    let mut rule: Vec<(f64, f64)> = gl
        .nodes
        .iter()
        .zip(&gl.weights)
        .map(|(t, w)| {
            let theta = half + half * t;
            (r * theta.sin(), w * theta.cos().powi(d as i32))
        })
        .collect();
    let total: f64 = rule.iter().map(|(_, w)| w).sum();
    rule.iter_mut().for_each(|(_, w)| *w /= total);
    rule
}

fn uniform_shift_rule(lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let gl = GaussLegendre::n32();
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    gl.nodes.iter().zip(&gl.weights).map(|(t, w)| (mid + half * t, 0.5 * w)).collect()
}

impl DgpSpec {
    /// Boundary-sharpness construction: `X ~ U[0,1]^d`, `x0 = 0`,
    /// `Y | X = x ~ N((x_1, 0, .., 0), I_m)`.
    pub fn gaussian_boundary(d: usize, m: usize) -> Result<Self> {
        if d == 0 || m == 0 {
            return invalid("d and m must be at least 1");
        }
        Ok(Self {
            id: if d == 1 && m == 1 { "gaussian_boundary".into() } else { format!("gaussian_boundary_d{d}_m{m}") },
            d,
            m,
            x0: vec![0.0; d],
            boundary: true,
            outcome: OutcomeKind::GaussianLocation,
            family: Family::GaussianBoundary {},
            regime: Regime::Qmd,
            exponents: Exponents { a_h: 1.0, a_tv: 1.0, sharp_a_h: Some(1.0), sharp_a_tv: Some(1.0), log_correction: false },
            score: Some(Score::GaussianFirstCoordinate),
        })
    }

    /// The Gaussian family re-centred at the interior point `x0 = 1/2` of
    /// `U[0,1]`. Symmetric averaging makes both distances `O(r²)`.
    pub fn gaussian_interior(m: usize) -> Result<Self> {
        if m == 0 {
            return invalid("m must be at least 1");
        }
        Ok(Self {
            id: if m == 1 { "gaussian_interior".into() } else { format!("gaussian_interior_m{m}") },
            d: 1,
            m,
            x0: vec![0.5],
            boundary: false,
            outcome: OutcomeKind::GaussianLocation,
            family: Family::GaussianInterior {},
            regime: Regime::Qmd,
            exponents: Exponents { a_h: 1.0, a_tv: 1.0, sharp_a_h: Some(2.0), sharp_a_tv: Some(2.0), log_correction: false },
            score: Some(Score::GaussianFirstCoordinate),
        })
    }

    /// No-polynomial-improvement construction: `X ~ U(B_r̃)` in `d`
    /// dimensions, `x0 = 0`, `P(Y = 1 | X = x) = 1/2 + δ(‖x‖)`.
    pub fn log_correction(d: usize, r_tilde: f64) -> Result<Self> {
        if d == 0 {
            return invalid("d must be at least 1");
        }
        if !(r_tilde > 0.0 && r_tilde.is_finite()) {
            return invalid("r_tilde must be positive");
        }
        Ok(Self {
            id: if d == 1 { "log_correction".into() } else { format!("log_correction_d{d}") },
            d,
            m: 1,
            x0: vec![0.0; d],
            boundary: false,
            outcome: OutcomeKind::Discrete { support: vec![0.0, 1.0] },
            family: Family::LogCorrection { r_tilde },
            regime: Regime::Qmd,
            exponents: Exponents { a_h: 1.0, a_tv: 1.0, sharp_a_h: None, sharp_a_tv: None, log_correction: true },
            score: Some(Score::Zero),
        })
    }

    /// QMD construction without the quadratic marginal profile: `X ~ U(−r̃, r̃)`, `p_x(1) = |x|³`.
    pub fn cubic_support(r_tilde: f64) -> Result<Self> {
        if !(r_tilde > 0.0 && r_tilde < 1.0) {
            return invalid("r_tilde must lie in (0, 1)");
        }
        Ok(Self {
            id: "cubic_support".into(),
            d: 1,
            m: 1,
            x0: vec![0.0],
            boundary: false,
            outcome: OutcomeKind::Discrete { support: vec![0.0, 1.0] },
            family: Family::CubicSupport { r_tilde },
            regime: Regime::Qmd,
            exponents: Exponents { a_h: 1.0, a_tv: 1.0, sharp_a_h: Some(1.5), sharp_a_tv: Some(3.0), log_correction: false },
            score: Some(Score::Zero),
        })
    }

    /// Two-point Hölder family, `d = 1`.
    ///
    /// Boundary (`interior = false`): `X ~ U[0, r̃]`, `π(x) = b + c x^κ`.
    /// Interior: `X ~ U(−r̃, r̃)`, `π(x) = b + c x·[with_linear_term] + c₂ |x|^κ`;
    /// the linear term averages out over symmetric balls.
    pub fn holder_two_point(p: HolderParams) -> Result<Self> {
        if !(p.kappa > 0.0 && p.kappa <= 2.0) {
            return invalid("kappa must lie in (0, 2]");
        }
        if !(p.r_tilde > 0.0 && p.r_tilde.is_finite()) {
            return invalid("r_tilde must be positive");
        }
        let (lo, hi) = holder_pi_range(&p);
        if !(lo > 0.0 && hi < 1.0) {
            return invalid(format!("π(x) ranges over [{lo}, {hi}] on the support; it must stay inside (0, 1)"));
        }
        let kappa_s = (p.kappa.ceil() as u32).saturating_sub(1);
        let kappa_r = p.kappa - kappa_s as f64;
        let (a_h, a_tv) = if p.interior {
            ((p.kappa / 2.0).min(1.0), p.kappa.min(2.0))
        } else {
            ((p.kappa / 2.0).min(0.5), p.kappa.min(1.0))
        };
        let moving = if p.interior { p.c2 != 0.0 } else { p.c != 0.0 };
        let sharp = moving.then_some(p.kappa);
        let side = if p.interior { "interior" } else { "boundary" };
        Ok(Self {
            id: format!("holder_{side}_kappa{}", p.kappa),
            d: 1,
            m: 1,
            x0: vec![0.0],
            boundary: !p.interior,
            outcome: OutcomeKind::Discrete { support: vec![0.0, 1.0] },
            family: Family::HolderTwoPoint(p),
            regime: Regime::Holder { kappa_s, kappa_r },
            exponents: Exponents { a_h, a_tv, sharp_a_h: sharp, sharp_a_tv: sharp, log_correction: false },
            score: None,
        })
    }

    fn with_id(mut self, id: &str) -> Self {
        self.id = id.to_string();
        self
    }

    /// Named default instances.
    pub fn registry() -> Vec<DgpSpec> {
        let holder = HolderParams::default();
        vec![
            Self::gaussian_boundary(1, 1).unwrap(),
            Self::gaussian_interior(1).unwrap(),
            Self::log_correction(1, (-3.0f64).exp()).unwrap(),
            Self::cubic_support(0.5).unwrap(),
            Self::holder_two_point(holder).unwrap().with_id("holder_boundary_k1"),
            Self::holder_two_point(HolderParams { kappa: 0.5, c: 0.3, ..holder }).unwrap().with_id("holder_boundary_k05"),
            Self::holder_two_point(HolderParams { base: 0.8, c: 0.3, ..holder })
                .unwrap()
                .with_id("holder_boundary_shifted"),
            Self::holder_two_point(HolderParams {
                kappa: 2.0,
                c: 0.3,
                c2: 0.8,
                interior: true,
                with_linear_term: true,
                ..holder
            })
            .unwrap()
            .with_id("holder_interior_quadratic"),
            Self::holder_two_point(HolderParams {
                kappa: 2.0,
                c: 0.3,
                c2: 0.0,
                interior: true,
                with_linear_term: true,
                ..holder
            })
            .unwrap()
            .with_id("holder_interior_linear"),
        ]
    }

    pub fn by_id(id: &str) -> Result<DgpSpec> {
        Self::registry()
            .into_iter()
            .find(|s| s.id == id)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown spec id `{id}`")))
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self.outcome, OutcomeKind::Discrete { .. })
    }

    pub fn geometry(&self) -> Geometry {
        match &self.family {
            Family::GaussianBoundary {} => Geometry::OrthantCube { d: self.d },
            Family::GaussianInterior {} => Geometry::CenteredBall { d: 1, radius: 0.5 },
            Family::LogCorrection { r_tilde } => Geometry::CenteredBall { d: self.d, radius: *r_tilde },
            Family::CubicSupport { r_tilde } => Geometry::CenteredBall { d: 1, radius: *r_tilde },
            Family::HolderTwoPoint(p) if p.interior => Geometry::CenteredBall { d: 1, radius: p.r_tilde },
            Family::HolderTwoPoint(p) => Geometry::HalfInterval { len: p.r_tilde },
        }
    }

    /// Radius below which the ball law has its small-`r` closed form.
    pub fn r_tilde(&self) -> f64 {
        match self.geometry() {
            Geometry::OrthantCube { .. } => 1.0,
            Geometry::CenteredBall { radius, .. } => radius,
            Geometry::HalfInterval { len } => len,
        }
    }

    pub fn in_support(&self, x: &[f64]) -> bool {
        if x.len() != self.d || x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match self.geometry() {
            Geometry::OrthantCube { .. } => x.iter().all(|v| (0.0..=1.0).contains(v)),
            Geometry::CenteredBall { radius, .. } => dist2(x, &self.x0).sqrt() <= radius,
            Geometry::HalfInterval { len } => (0.0..=len).contains(&x[0]),
        }
    }

    /// `P(Y = 1 | X = x)` for two-point families.
    pub fn pi_at(&self, x: &[f64]) -> Result<f64> {
        if !self.in_support(x) {
            return Err(Error::OutOfSupport(x.to_vec()));
        }
        match &self.family {
            Family::LogCorrection { .. } => Ok(0.5 + log_correction_delta(dist2(x, &self.x0).sqrt())),
            Family::CubicSupport { .. } => Ok(x[0].abs().powi(3)),
            Family::HolderTwoPoint(p) => Ok(holder_pi(p, x[0])),
            _ => Err(Error::Unsupported(format!("{} does not have a two-point outcome", self.id))),
        }
    }

    /// `π(x0)`.
    pub fn pi0(&self) -> Result<f64> {
        self.pi_at(&self.x0.clone())
    }

    /// `P_r(Y = 1) − π(x0)` for two-point families, computed without
    /// cancellation.
    pub fn ball_pi_excess(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return invalid(format!("radius must be positive, got {r}"));
        }
        let rho = r.min(self.r_tilde());
        match &self.family {
            Family::LogCorrection { .. } => Ok(log_correction_ball_excess(self.d, rho)),
            Family::CubicSupport { .. } => Ok(rho.powi(3) / 4.0),
            Family::HolderTwoPoint(p) => {
                let coef = if p.interior { p.c2 } else { p.c };
                Ok(coef * rho.powf(p.kappa) / (p.kappa + 1.0))
            }
            _ => Err(Error::Unsupported(format!("{} does not have a two-point outcome", self.id))),
        }
    }

    /// `P_r(Y = 1)` for two-point families.
    pub fn ball_pi(&self, r: f64) -> Result<f64> {
        Ok(self.pi0()? + self.ball_pi_excess(r)?)
    }

    /// Exact law of `Y` given `X = x`.
    pub fn conditional_law(&self, x: &[f64]) -> Result<ConditionalLaw> {
        if !self.in_support(x) {
            return Err(Error::OutOfSupport(x.to_vec()));
        }
        match &self.family {
            Family::GaussianBoundary {} | Family::GaussianInterior {} => {
                let mut mean = vec![0.0; self.m];
                mean[0] = x[0];
                Ok(ConditionalLaw::GaussianLocation { mean })
            }
            _ => Ok(ConditionalLaw::two_point(self.pi_at(x)?)),
        }
    }

    /// Law `P_r` of `Y` given `X ∈ B_r(x0)`.
    pub fn ball_law(&self, r: f64) -> Result<ConditionalLaw> {
        if !(r > 0.0 && r.is_finite()) {
            return invalid(format!("radius must be positive and finite, got {r}"));
        }
        match &self.family {
            Family::GaussianBoundary {} => {
                let shifts = if r <= 1.0 {
                    orthant_shift_rule(self.d, r)
                } else if self.d == 1 {
                    uniform_shift_rule(0.0, 1.0)
                } else {
                    return Err(Error::Unsupported(format!(
                        "ball law of {} for r > 1 (ball leaves the unit cube)",
                        self.id
                    )));
                };
                Ok(ConditionalLaw::Density1d(Density1d::gaussian_shift_mixture(0.0, shifts, vec![0.0; self.m - 1])))
            }
            Family::GaussianInterior {} => {
                let rho = r.min(0.5);
                Ok(ConditionalLaw::Density1d(Density1d::gaussian_shift_mixture(
                    self.x0[0],
                    uniform_shift_rule(-rho, rho),
                    vec![0.0; self.m - 1],
                )))
            }
            _ => Ok(ConditionalLaw::two_point(self.ball_pi(r)?)),
        }
    }

    /// Draws one observation into `x` (length `d`) and `y` (length `m`).
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, x: &mut [f64], y: &mut [f64]) {
        match self.geometry() {
            Geometry::OrthantCube { .. } => x.iter_mut().for_each(|v| *v = rng.random::<f64>()),
            Geometry::HalfInterval { len } => x[0] = len * rng.random::<f64>(),
            Geometry::CenteredBall { d, radius } => {
                if d == 1 {
                    x[0] = self.x0[0] + radius * (2.0 * rng.random::<f64>() - 1.0);
                } else {
                    let mut norm2 = 0.0;
                    for v in x.iter_mut() {
                        *v = rng.sample(StandardNormal);
                        norm2 += *v * *v;
                    }
                    let rad = radius * rng.random::<f64>().powf(1.0 / d as f64) / norm2.sqrt();
                    x.iter_mut().zip(&self.x0).for_each(|(v, c)| *v = c + *v * rad);
                }
            }
        }
        match &self.family {
            Family::GaussianBoundary {} | Family::GaussianInterior {} => {
                for (j, v) in y.iter_mut().enumerate() {
                    let z: f64 = rng.sample(StandardNormal);
                    *v = if j == 0 { x[0] + z } else { z };
                }
            }
            _ => {
                let pi = match &self.family {
                    Family::LogCorrection { .. } => 0.5 + log_correction_delta(dist2(x, &self.x0).sqrt()),
                    Family::CubicSupport { .. } => x[0].abs().powi(3),
                    Family::HolderTwoPoint(p) => holder_pi(p, x[0]),
                    _ => unreachable!(),
                };
                y[0] = if rng.random::<f64>() < pi { 1.0 } else { 0.0 };
            }
        }
    }

    /// `n` i.i.d. draws from the joint law.
    pub fn sample_with(&self, n: usize, rng: &mut StreamRng) -> Result<Dataset> {
        if n == 0 {
            return invalid("sample size must be at least 1");
        }
        let mut x = vec![0.0; n * self.d];
        let mut y = vec![0.0; n * self.m];
        for i in 0..n {
            self.draw(rng, &mut x[i * self.d..(i + 1) * self.d], &mut y[i * self.m..(i + 1) * self.m]);
        }
        Dataset::new(self.d, self.m, x, y)
    }

    /// `n` i.i.d. draws from stream 0 of `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Dataset> {
        self.sample_with(n, &mut stream_rng(seed, 0))
    }

    /// Structural invariants of the registered exponents and laws.
    pub fn validate(&self) -> Result<()> {
        let e = &self.exponents;
        if !(e.a_h > 0.0 && e.a_tv >= e.a_h && e.a_tv <= 2.0 * e.a_h) {
            return invalid(format!("exponents a_h={}, a_tv={} violate 0 < a_h ≤ a_tv ≤ 2 a_h", e.a_h, e.a_tv));
        }
        if self.x0.len() != self.d || !self.in_support(&self.x0) {
            return invalid("x0 must lie in the covariate support");
        }
        let on_boundary = matches!(self.geometry(), Geometry::OrthantCube { .. } | Geometry::HalfInterval { .. });
        if on_boundary != self.boundary {
            return invalid("boundary flag disagrees with the family geometry");
        }
        self.conditional_law(&self.x0)?.check()
    }

    pub fn to_document(&self) -> SpecDocument {
        SpecDocument {
            id: self.id.clone(),
            d: self.d,
            m: self.m,
            x0: self.x0.clone(),
            family: self.family.clone(),
            regime: self.regime,
            exponents: self.exponents,
        }
    }

    /// Rebuilds a spec from its JSON document, rejecting documents whose
    /// derived fields disagree with the family definition.
    pub fn from_document(doc: SpecDocument) -> Result<Self> {
        let mut spec = match &doc.family {
            Family::GaussianBoundary {} => Self::gaussian_boundary(doc.d, doc.m)?,
            Family::GaussianInterior {} => Self::gaussian_interior(doc.m)?,
            Family::LogCorrection { r_tilde } => Self::log_correction(doc.d, *r_tilde)?,
            Family::CubicSupport { r_tilde } => Self::cubic_support(*r_tilde)?,
            Family::HolderTwoPoint(p) => Self::holder_two_point(*p)?,
        };
        if spec.d != doc.d || spec.m != doc.m || spec.x0 != doc.x0 {
            return invalid(format!("dimensions or x0 of `{}` do not match its family", doc.id));
        }
        if spec.regime != doc.regime || spec.exponents != doc.exponents {
            return invalid(format!("regime or exponents of `{}` do not match its family", doc.id));
        }
        spec.id = doc.id;
        Ok(spec)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_document(serde_json::from_str(text)?)
    }
}

/// JSON form `{id, d, m, x0, family, params, regime, exponents}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecDocument {
    pub id: String,
    pub d: usize,
    pub m: usize,
    pub x0: Vec<f64>,
    #[serde(flatten)]
    pub family: Family,
    pub regime: Regime,
    pub exponents: Exponents,
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

fn holder_pi(p: &HolderParams, x: f64) -> f64 {
    if p.interior {
        let lin = if p.with_linear_term { p.c * x } else { 0.0 };
        p.base + lin + p.c2 * x.abs().powf(p.kappa)
    } else {
        p.base + p.c * x.max(0.0).powf(p.kappa)
    }
}

/// Range of `π` over the support: endpoints, `x0` and interior stationary
/// points of each monotone piece.
fn holder_pi_range(p: &HolderParams) -> (f64, f64) {
    let mut xs = vec![0.0, p.r_tilde];
    if p.interior {
        xs.push(-p.r_tilde);
        let c = if p.with_linear_term { p.c } else { 0.0 };
        if p.c2 != 0.0 && p.kappa != 1.0 {
            for sign in [1.0, -1.0] {
                // d/dx of sign·c·t + c2 t^κ in t = |x| vanishes at t*.
                let t = (-sign * c / (p.c2 * p.kappa)).powf(1.0 / (p.kappa - 1.0));
                if t.is_finite() && t > 0.0 && t < p.r_tilde {
                    xs.push(sign * t);
                }
            }
        }
    }
    let vals: Vec<f64> = xs.iter().map(|&x| holder_pi(p, x)).collect();
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// `(d / ρ^d) ∫_0^ρ δ(v) v^{d−1} dv`, the ball average of `δ(‖x‖)` over
/// `B_ρ`, by adaptive quadrature on the rescaled variable `s = v/ρ`.
pub fn log_correction_ball_excess(d: usize, rho: f64) -> f64 {
    let cutoff = (-2.0f64).exp();
    let upper = (cutoff / rho).min(1.0);
    let df = d as f64;
    let ln_rho = rho.ln();
    let integrand = |s: f64| {
        if s <= 0.0 {
            0.0
        } else {
            df * s.powi(d as i32) / (1.0 - ln_rho - s.ln())
        }
    };
    let opts = QuadOptions::default().with_abs_tol(1e-13).with_panels(16);
    rho * integrate(integrand, 0.0, upper, &opts).value
}
