//! Joint Hellinger distance along k = floor(n^gamma) for growth exponents on
//! both sides of the threshold 2/(2 + d).
//!
//! cargo run --release --example growth_threshold

use ios_rates::dist::Metric;
use ios_rates::rates::growth_threshold_study;
use ios_rates::DgpSpec;

fn main() -> ios_rates::Result<()> {
    let spec = DgpSpec::by_id("holder_boundary_k1")?;
    let n_grid: Vec<usize> = (3..=24).map(|e| 1usize << e).collect();
    let report = growth_threshold_study(&spec, Metric::Hellinger, &[0.4, 0.55, 0.8], &n_grid)?;
    println!("threshold 2/(2+d) = {:.4}", report.threshold);
    for s in &report.series {
        println!("\ngamma = {} (vanishing: {}, asserted: {})", s.gamma, s.vanishing, s.asserted);
        for row in s.rows.iter().step_by(3) {
            println!("  n = 2^{:<2} k = {:>6}  H = {:.5e}", row.n.unwrap().trailing_zeros(), row.k.unwrap(), row.distance);
        }
    }
    Ok(())
}
