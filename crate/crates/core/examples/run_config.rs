//! Builds a run config in code, executes it the way the CLI does, and shows
//! the JSON that `ios-rates --config` accepts.
//!
//! cargo run --example run_config

use ios_rates::cli::{execute, Body, Command, RunConfig};

fn main() -> ios_rates::Result<()> {
    let json = r#"{ "command": { "dist": { "marginal": { "spec": "cubic_support", "r": 0.25, "metric": "h" } } }, "seed": 1 }"#;
    let cfg: RunConfig = serde_json::from_str(json)?;
    println!("config\n{}\n", serde_json::to_string_pretty(&cfg)?);

    let outcome = execute(&cfg)?;
    match outcome.body {
        Body::Json(v) => println!("result\n{}", serde_json::to_string_pretty(&v)?),
        Body::Csv(text) | Body::Text(text) => println!("result\n{text}"),
    }

    if let Command::Dist(_) = cfg.command {
        println!("\nsummary {}", outcome.summary);
    }
    Ok(())
}
