//! Rejection rates of the permutation test: size on a continuous null and
//! power against a shifted two-point alternative as n grows.
//!
//! cargo run --release --example size_power -- [reps]

use ios_rates::rdd::{size_power_simulation_with, PermSettings};
use ios_rates::DgpSpec;

fn main() -> ios_rates::Result<()> {
    let reps: usize = std::env::args().nth(1).map_or(1000, |s| s.parse().expect("reps must be an integer"));
    let perms = PermSettings { max_exact: 20_000, n_random: 999 };

    let null = DgpSpec::gaussian_boundary(1, 1)?;
    let size = size_power_simulation_with(&null, &null, 2000, 0.5, 1.0, reps, 0.05, 1, perms)?;
    println!("size  n = 2000 q = {}: {:.4} ± {:.4}", size.q, size.rejection_rate, size.std_error);

    let left = DgpSpec::by_id("holder_boundary_k1")?;
    let right = DgpSpec::by_id("holder_boundary_shifted")?;
    for n in [500, 2000, 8000] {
        let power = size_power_simulation_with(&left, &right, n, 0.3, 1.0, reps, 0.05, 2, perms)?;
        println!("power n = {n:<5} q = {:<3}: {:.4} ± {:.4}", power.q, power.rejection_rate, power.std_error);
    }
    Ok(())
}
