//! Accuracy sweep over k on PA(128) for every method, with the per-seed
//! summary. Pass a seed count as the first argument.

use coopnet::generators::GraphSpec;
use coopnet::harness::{default_k, rows_to_csv, summarize, summary_to_csv, sweep_dataset, Method, SweepOptions};

fn main() -> coopnet::Result<()> {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let seeds: Vec<u64> = (1..=seeds).collect();
    let rows = sweep_dataset(|s| GraphSpec::pa(128, s), &seeds, &Method::ALL, default_k(128), SweepOptions::new())?;
    print!("{}", rows_to_csv(&rows));
    println!();
    print!("{}", summary_to_csv(&summarize(&rows)));
    Ok(())
}
