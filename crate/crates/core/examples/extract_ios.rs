//! Induced order statistics of the ten-point worked example: distance ranks,
//! the k nearest outcomes in sample order, and the two-sided blocks around a
//! cutoff at 0.
//!
//! cargo run --example extract_ios

use ios_rates::ios::{extract_ranked, extract_two_sided};
use ios_rates::Dataset;

fn main() -> ios_rates::Result<()> {
    let data = Dataset::read_csv_path(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/ten_points.csv"))?;
    let r = extract_ranked(&data, &[0.0], 4)?;
    let ranks = r.ranks.as_ref().expect("ranks requested");

    println!("{:>3} {:>6} {:>4} {:>5}", "i", "x", "y", "rank");
    for i in 0..data.n() {
        println!("{:>3} {:>6} {:>4} {:>5}", i + 1, data.x_row(i)[0], data.y_row(i)[0], ranks[i]);
    }
    let one_based = |v: &[usize]| v.iter().map(|i| i + 1).collect::<Vec<_>>();
    println!("\nk = 4 nearest to x0 = 0");
    println!("  by distance  {:?}", one_based(&r.nearest));
    println!("  iota         {:?}", one_based(&r.iota));
    println!("  S_n          {:?}", r.s_n);
    println!("  R_(k+1)      {:?}", r.r_k_plus_1);

    let two = extract_two_sided(&data, 0.0, 2)?;
    println!("\nq = 2 per side of the cutoff");
    println!("  left   {:?}", two.left.s_n);
    println!("  right  {:?}", two.right.s_n);
    Ok(())
}
