//! mp-means on three well separated blobs.
//!
//! With the default pooled-covariance Mahalanobis views the triangle stops at
//! two clusters; Euclidean views split it into three.

use mudpod::datagen::{Generator, GeneratorSpec};
use mudpod::evaluation::nmi;
use mudpod::mpmeans::{mp_means, MpMeansConfig};
use mudpod::mudpod::{Distance, MudpodConfig};

fn main() -> mudpod::Result<()> {
    let generator = Generator::isotropic_mixture(vec![vec![0.0, 0.0], vec![10.0, 0.0], vec![5.0, 8.66]]);
    let data = GeneratorSpec::new(generator, 900, 21).generate()?;
    let truth = data.labels().unwrap().to_vec();

    for distance in [Distance::Mahalanobis, Distance::Euclidean] {
        let config = MpMeansConfig {
            mudpod: MudpodConfig {
                distance,
                ..MudpodConfig::default()
            },
            ..MpMeansConfig::default()
        };
        let state = mp_means(&data, &config)?;
        println!(
            "{distance:?}: k={} sizes={:?} stop={:?} nmi={:.3}",
            state.k,
            state.cluster_sizes(),
            state.stop_reason,
            nmi(&truth, &state.labels)?
        );
        for s in &state.splits {
            println!("  {s:?}");
        }
    }
    Ok(())
}
