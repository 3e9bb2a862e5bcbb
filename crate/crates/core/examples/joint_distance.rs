//! Distance between the joint law of S_n and the i.i.d. benchmark P^k, from
//! the exact count-domain engine and from the coupling bound.
//!
//! cargo run --release --example joint_distance -- [spec]

use ios_rates::dist::{joint_distance_bound, joint_distance_exact, Metric};
use ios_rates::DgpSpec;

fn main() -> ios_rates::Result<()> {
    let id = std::env::args().nth(1).unwrap_or_else(|| "holder_boundary_k1".into());
    let spec = DgpSpec::by_id(&id)?;
    println!("{id}: k = floor(sqrt(n))");
    println!("{:>9} {:>5} {:>12} {:>12} {:>12} {:>12}", "n", "k", "H exact", "H bound", "TV exact", "TV bound");
    for e in (6..=20).step_by(2) {
        let n = 1usize << e;
        let k = (n as f64).sqrt() as usize;
        let bound_h = joint_distance_bound(&spec, n, k, Metric::Hellinger)?.value;
        let bound_tv = joint_distance_bound(&spec, n, k, Metric::TotalVariation)?.value;
        let (exact_h, exact_tv) = if spec.is_discrete() {
            (
                format!("{:.5e}", joint_distance_exact(&spec, n, k, Metric::Hellinger)?.value),
                format!("{:.5e}", joint_distance_exact(&spec, n, k, Metric::TotalVariation)?.value),
            )
        } else {
            ("-".into(), "-".into())
        };
        println!("{n:>9} {k:>5} {exact_h:>12} {bound_h:>12.5e} {exact_tv:>12} {bound_tv:>12.5e}");
    }
    Ok(())
}
