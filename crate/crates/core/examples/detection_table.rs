//! Detection rate of the test on each synthetic benchmark row.
//!
//! `cargo run --release --example detection_table [runs]`

use mudpod::bench::{table1, BenchConfig};

fn main() -> mudpod::Result<()> {
    let runs = std::env::args().nth(1).map_or(10, |s| s.parse().expect("runs"));
    let result = table1(&BenchConfig {
        runs,
        ..BenchConfig::default()
    })?;
    println!("{:<20} {:>10} {:>9}", "generator", "multimodal", "detected");
    for row in &result.summary {
        println!(
            "{:<20} {:>10} {:>8.0}%",
            row.generator, row.multimodal_by_construction, row.detection_pct
        );
    }
    Ok(())
}
