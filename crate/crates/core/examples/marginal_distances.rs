//! Hellinger and total-variation distance between the ball-averaged law P_r
//! and the law P at x0, for every registered spec on a geometric grid.
//!
//! cargo run --release --example marginal_distances

use ios_rates::dist::{marginal_distance, Metric};
use ios_rates::rates::geometric_grid;
use ios_rates::DgpSpec;

fn main() -> ios_rates::Result<()> {
    for spec in DgpSpec::registry() {
        println!("{} (a_h = {}, a_tv = {})", spec.id, spec.exponents.a_h, spec.exponents.a_tv);
        println!("  {:>10} {:>12} {:>12} {:>10}", "r", "H", "TV", "method");
        for r in geometric_grid(spec.r_tilde() / 2.0, 6) {
            let h = marginal_distance(&spec, r, Metric::Hellinger)?;
            let tv = marginal_distance(&spec, r, Metric::TotalVariation)?;
            println!("  {r:>10.3e} {:>12.5e} {:>12.5e} {:>10}", h.value, tv.value, format!("{:?}", h.method));
        }
    }
    Ok(())
}
