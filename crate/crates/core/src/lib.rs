//! Induced order statistics (IOS) and the rates at which their law approaches
//! the i.i.d. benchmark.
//!
//! The crate is organised around the objects that appear when one keeps the
//! `k` observations whose covariate lies closest to a point `x0`:
//!
//! * [`dgp`] registers analytically tractable data-generating processes with
//!   exact conditional laws `P_x` and ball-averaged laws `P_r`.
//! * [`ios`] extracts the induced order statistics `S_n` (one- and two-sided).
//! * [`dist`] computes Hellinger and total-variation distances, both between
//!   marginal laws and between the joint law `L(S_n)` and `P^k`.
//! * [`ordstat`] holds the radius CDF `F(r)`, the law of `R_(k+1)` and the
//!   Beta moments of uniform order statistics.
//! * [`rates`] fits log-log rates and runs the `k`-growth threshold study.
//! * [`rdd`] is the Cramér–von Mises permutation test for covariate balance at
//!   a regression-discontinuity cutoff.
//! * [`knn`] holds IOS-based estimators and their normal-approximation
//!   diagnostics.
//! * [`cli`] is the command-line front end used by the `ios-rates` binary.

pub mod cli;
pub mod dataset;
pub mod dgp;
pub mod dist;
mod error;
pub mod ios;
pub mod knn;
pub mod ordstat;
pub mod quad;
pub mod rates;
pub mod rdd;
pub mod rng;
pub mod special;

pub use dataset::Dataset;
pub use dgp::{ConditionalLaw, DgpSpec};
pub use dist::{DistanceEstimate, Metric};
pub use error::{Error, Result};
pub use ios::IosResult;
pub use rates::RateFit;
