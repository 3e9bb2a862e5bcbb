//! Nearest-neighbour estimators of conditional functionals and the normal
//! approximation of the standardised mean, next to its coupling budget.
//!
//! cargo run --release --example knn_estimators -- [reps]

use ios_rates::ios::extract;
use ios_rates::knn::{mse_budget, normality_diagnostic, Statistic};
use ios_rates::DgpSpec;

fn main() -> ios_rates::Result<()> {
    let reps: usize = std::env::args().nth(1).map_or(5000, |s| s.parse().expect("reps must be an integer"));

    let spec = DgpSpec::gaussian_boundary(1, 1)?;
    let data = spec.sample(10_000, 3)?;
    let s_n = extract(&data, &spec.x0, 100)?.s_n;
    for stat in ["mean", "cdf:0", "quantile:0.5"] {
        let stat: Statistic = stat.parse()?;
        println!("{stat:<14} {:+.4}", stat.evaluate(&s_n, 1)?[0]);
    }

    println!("\n{:<20} {:>6} {:>5} {:>8} {:>9} {:>8}", "spec", "n", "k", "KS", "TV bound", "budget");
    for id in ["gaussian_boundary", "holder_boundary_k1"] {
        let spec = DgpSpec::by_id(id)?;
        for k in [100, 1584] {
            let r = normality_diagnostic(&spec, Statistic::Mean, 10_000, k, reps, 7)?;
            println!(
                "{id:<20} {:>6} {:>5} {:>8.4} {:>9.4} {:>8.4}",
                r.n,
                r.k,
                r.ks_distance.unwrap_or(f64::NAN),
                r.tv_bound.unwrap_or(f64::NAN),
                r.budget.unwrap_or(f64::NAN)
            );
        }
    }

    let b = mse_budget(&DgpSpec::by_id("holder_boundary_k1")?, 10_000, 50, reps, 9)?;
    println!("\nMSE {:.3e} ± {:.1e} within 2·oracle + 8B²·TV = {:.3e}: {}", b.mse, b.mse_se, b.budget, b.holds);
    Ok(())
}
