//! Draws from every registered data-generating process and compares the
//! frequency of small-ball outcomes with the exact ball-averaged law.
//!
//! cargo run --release --example sample_dgp -- [n] [seed]

use ios_rates::{ConditionalLaw, DgpSpec};

fn main() -> ios_rates::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(200_000, |s| s.parse().expect("n must be an integer"));
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed must be an integer"));

    println!("{:<26} {:>3} {:>8} {:>10} {:>10}", "spec", "d", "r", "in ball", "P(Y = 1)");
    for spec in DgpSpec::registry() {
        let data = spec.sample(n, seed)?;
        let r = spec.r_tilde() / 2.0;
        let inside: Vec<f64> = (0..data.n())
            .filter(|&i| {
                let x = data.x_row(i);
                x.iter().zip(&spec.x0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() <= r
            })
            .map(|i| data.y_row(i)[0])
            .collect();
        let share = |v: f64| inside.iter().filter(|y| **y == v).count() as f64 / inside.len() as f64;
        let line = match spec.ball_law(r)? {
            ConditionalLaw::Discrete { pmf, .. } => format!("{:.4} (exact {:.4})", share(1.0), pmf[1]),
            ConditionalLaw::GaussianLocation { .. } | ConditionalLaw::Density1d(_) => {
                let mean = inside.iter().sum::<f64>() / inside.len() as f64;
                format!("mean Y {mean:+.4}")
            }
        };
        println!("{:<26} {:>3} {:>8.4} {:>10} {line}", spec.id, spec.d, r, inside.len());
    }
    Ok(())
}
