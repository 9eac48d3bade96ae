//! Agreement of each (space, distance, observer) variant with the known
//! answer on random two-Gaussian mixtures.
//!
//! `cargo run --release --example ablation [mixtures] [runs]`

use mudpod::bench::{ablation, analytic_mixture, BenchConfig};

fn main() -> mudpod::Result<()> {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<usize>().expect("integer"));
    let n_mixtures = args.next().unwrap_or(20);
    let runs = args.next().unwrap_or(2);

    let m = analytic_mixture(0, 0);
    println!("example mixture: separation {:.2}, multimodal {}", m.separation, m.multimodal);

    let result = ablation(&BenchConfig {
        n_mixtures,
        runs,
        ..BenchConfig::default()
    })?;
    for c in &result.cells {
        println!("{:?}/{:?}/{:?}: {:.3} over {}", c.space, c.distance, c.observer, c.agreement, c.trials);
    }
    Ok(())
}
