//! TV(P_r, P) on the log-correction family: the profile TV (1 - ln r) / r
//! stays bounded, so no bound O(r^{1+eps}) can hold.
//!
//! cargo run --release --example log_correction_profile

use ios_rates::rates::{log_correction_profile, log_grid};
use ios_rates::DgpSpec;

fn main() -> ios_rates::Result<()> {
    let spec = DgpSpec::by_id("log_correction")?;
    let grid = log_grid((-24.0f64).exp(), (-4.0f64).exp(), 11);
    let report = log_correction_profile(&spec, &grid, &[0.05, 0.1, 0.2])?;
    println!("{:>10} {:>12} {:>10} {:>12}", "-ln r", "TV", "profile", "lower bound");
    for row in &report.rows {
        println!("{:>10.2} {:>12.5e} {:>10.5} {:>12.5e}", -row.r.ln(), row.tv, row.profile, row.lower_bound);
    }
    println!("\nprofile range [{:.4}, {:.4}], pure-power slope {:.4}", report.profile_min, report.profile_max, report.power_fit.slope);
    for c in &report.epsilon_checks {
        println!("eps = {:<5} tail slope {:.4}  bound O(r^(1+eps)) fails: {}", c.epsilon, c.tail_slope, c.bound_fails);
    }
    Ok(())
}
