//! Relative error in the estimated number of clusters against the number of
//! views per test.

use mudpod::bench::{mcsweep, BenchConfig};

fn main() -> mudpod::Result<()> {
    let result = mcsweep(&BenchConfig {
        runs: 5,
        ..BenchConfig::default()
    })?;
    for row in &result.summary {
        println!(
            "{:<20} M={:<4} error {:.3} (var {:.3}) nmi {:.3}",
            row.generator, row.n_views, row.mean_relative_k_error, row.var_relative_k_error, row.mean_nmi
        );
    }
    Ok(())
}
