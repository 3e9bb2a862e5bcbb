//! Log-log slopes of the marginal distances against the exponents each
//! family guarantees, and the contrast between boundary and interior points.
//!
//! cargo run --release --example rate_fits

use ios_rates::dist::Metric;
use ios_rates::rates::{log_grid, marginal_rate_fit, quadratic_profile_comparison, TAU_CLOSED_FORM};
use ios_rates::DgpSpec;

fn main() -> ios_rates::Result<()> {
    let grid = log_grid(1e-3, 1e-1, 13);
    println!("{:<26} {:>6} {:>8} {:>8} {:>6} {:>8}  verdict", "spec", "metric", "slope", "target", "sharp", "R^2");
    for spec in DgpSpec::registry() {
        let grid = log_grid(1e-3, spec.r_tilde().min(0.1) * 0.9, 13);
        for metric in [Metric::Hellinger, Metric::TotalVariation] {
            let fit = marginal_rate_fit(&spec, metric, &grid, TAU_CLOSED_FORM)?.fit;
            println!(
                "{:<26} {:>6} {:>8.4} {:>8} {:>6} {:>8.5}  {:?}",
                spec.id, metric.to_string(), fit.slope, fit.theoretical, fit.sharp, fit.r_squared, fit.verdict
            );
        }
    }

    let specs = ["holder_interior_quadratic", "gaussian_boundary", "gaussian_interior"].map(|id| DgpSpec::by_id(id).unwrap());
    println!("\nquadratic profile");
    for row in quadratic_profile_comparison(&specs, &grid, TAU_CLOSED_FORM)? {
        println!("  {:<26} boundary={:<5} H {:.3}  TV {:.3}  quadratic={}", row.spec, row.boundary, row.h.slope, row.tv.slope, row.quadratic);
    }
    Ok(())
}
