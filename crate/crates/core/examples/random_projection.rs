//! Target dimension of the Gaussian random projection, and how well it keeps
//! pairwise distances.

use mudpod::projection::{jl_dimension, project, ProjectionSpec};
use mudpod::{seed, Dataset};
use rand::Rng;
use rand_distr::StandardNormal;

fn main() -> mudpod::Result<()> {
    for (n, eps) in [(1000, 0.99), (1000, 0.5), (10_000, 0.5), (60_000, 0.99)] {
        println!("n={n:<6} eps={eps:<4} q={} (capped at d=784: {})", jl_dimension(n, eps, usize::MAX)?, jl_dimension(n, eps, 784)?);
    }

    let mut rng = seed::stream(11);
    let (n, d) = (300, 500);
    let data = Dataset::new(n, d, (0..n * d).map(|_| rng.sample(StandardNormal)).collect())?;
    let spec = ProjectionSpec::for_points(n, d, 0.5, 12)?;
    let low = project(&data, &spec.sample()?)?;

    let dist = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            let ratio = dist(low.row(i), low.row(j)) / dist(data.row(i), data.row(j));
            worst = worst.max((ratio - 1.0).abs());
        }
    }
    println!("{d} -> {} dims, worst squared-distance distortion {worst:.3}", spec.target_dim);
    Ok(())
}
