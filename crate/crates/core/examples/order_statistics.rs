//! Radius CDF with its small-radius sandwich, the density of R_(k+1) and the
//! Beta moments of uniform order statistics.
//!
//! cargo run --release --example order_statistics

use ios_rates::ordstat::{r_order_density, radius_law, uniform_order_moment};
use ios_rates::DgpSpec;

fn main() -> ios_rates::Result<()> {
    for d in 1..=3 {
        let spec = DgpSpec::gaussian_boundary(d, 1)?;
        let law = radius_law(&spec);
        println!("{}: r_max = {:.4}, C_L = {:.4}, C_H = {:.4}, r1 = {}", spec.id, law.r_max, law.c_l, law.c_h, law.r1);
        for r in [0.1, 0.5, 0.9, law.r_max * 0.99] {
            let rd = r.powi(d as i32);
            println!("  F({r:.3}) = {:.6}   sandwich [{:.6}, {:.6}]", law.cdf(r), law.c_l * rd, law.c_h * rd);
        }
    }

    let spec = DgpSpec::gaussian_boundary(1, 1)?;
    let dens = r_order_density(&spec, 100, 10)?;
    let mode = (1..10_000).map(|i| i as f64 / 10_000.0).max_by(|a, b| dens.pdf(*a).total_cmp(&dens.pdf(*b))).unwrap();
    println!("\nR_(11) among n = 100 uniforms: mode {mode:.4} (k/(n-1) = {:.4})", 10.0 / 99.0);

    println!("\nE[U_(k:n)^m] / (k/n)^m");
    println!("{:>8} {:>6} {:>10} {:>10}", "n", "k", "m = 1", "m = 2");
    for n in [100usize, 1000, 10_000, 100_000] {
        let k = (n as f64).sqrt() as usize;
        let ratio = |m: f64| uniform_order_moment(m, k, n).map(|v| v / (k as f64 / n as f64).powf(m));
        println!("{n:>8} {k:>6} {:>10.5} {:>10.5}", ratio(1.0)?, ratio(2.0)?);
    }
    Ok(())
}
