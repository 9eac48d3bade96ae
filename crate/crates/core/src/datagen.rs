//! Synthetic mixtures used in the experiments, and feature-wise
//! z-transformation.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    /// Component chosen by weight, then a multivariate normal draw.
    GaussianMixture {
        weights: Vec<f64>,
        means: Vec<Vec<f64>>,
        covariances: Vec<Vec<Vec<f64>>>,
    },
    /// Equal-weight concentric circles with isotropic Gaussian noise.
    Circles { radii: Vec<f64>, noise: f64 },
    /// Two interleaved half circles with isotropic Gaussian noise.
    Moons { noise: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub generator: Generator,
    pub n_points: usize,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(generator: Generator, n_points: usize, seed: u64) -> Self {
        Self {
            generator,
            n_points,
            seed,
        }
    }

    /// Generates from the stream keyed by `self.seed`.
    pub fn generate(&self) -> Result<Dataset> {
        generate(self, &mut seed::stream(self.seed))
    }
}

impl Generator {
    pub fn dim(&self) -> usize {
        match self {
            Generator::GaussianMixture { means, .. } => means.first().map_or(0, Vec::len),
            Generator::Circles { .. } | Generator::Moons { .. } => 2,
        }
    }

    pub fn n_components(&self) -> usize {
        match self {
            Generator::GaussianMixture { weights, .. } => weights.len(),
            Generator::Circles { radii, .. } => radii.len(),
            Generator::Moons { .. } => 2,
        }
    }

    /// Equal-weight mixture of identity-covariance Gaussians.
    pub fn isotropic_mixture(means: Vec<Vec<f64>>) -> Self {
        let k = means.len();
        let d = means.first().map_or(0, Vec::len);
        Generator::GaussianMixture {
            weights: vec![1.0 / k as f64; k],
            covariances: vec![identity(d); k],
            means,
        }
    }
}

pub fn identity(d: usize) -> Vec<Vec<f64>> {
    (0..d)
        .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// Symmetric square root of a PSD covariance, row-major.
fn covariance_root(cov: &[Vec<f64>], d: usize, component: usize) -> Result<Vec<f64>> {
    let bad = |why: &str| Error::InvalidGenerator(format!("covariance {component}: {why}"));
    if cov.len() != d || cov.iter().any(|r| r.len() != d) {
        return Err(bad(&format!("must be {d}x{d}")));
    }
    let m = DMatrix::from_fn(d, d, |i, j| cov[i][j]);
    if m.iter().any(|v| !v.is_finite()) {
        return Err(bad("non-finite entry"));
    }
    let scale = m.amax().max(1.0);
    if (&m - m.transpose()).amax() > 1e-9 * scale {
        return Err(bad("not symmetric"));
    }
    let eig = SymmetricEigen::new(m);
    if eig.eigenvalues.min() < -1e-10 * scale {
        return Err(bad("not positive semidefinite"));
    }
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let v = &eig.eigenvectors;
    let root = v * DMatrix::from_diagonal(&roots) * v.transpose();
    Ok((0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| root[(i, j)]).collect())
}

fn validate(spec: &GeneratorSpec) -> Result<()> {
    if spec.n_points == 0 {
        return Err(Error::InvalidGenerator("n_points must be at least 1".into()));
    }
    match &spec.generator {
        Generator::GaussianMixture {
            weights,
            means,
            covariances,
        } => {
            if weights.is_empty() {
                return Err(Error::InvalidGenerator("at least one component is required".into()));
            }
            if means.len() != weights.len() || covariances.len() != weights.len() {
                return Err(Error::InvalidGenerator(
                    "weights, means and covariances must have equal length".into(),
                ));
            }
            if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
                return Err(Error::InvalidGenerator("weights must be positive".into()));
            }
            let total: f64 = weights.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidGenerator(format!("weights sum to {total}, not 1")));
            }
            let d = means[0].len();
            if d == 0 || means.iter().any(|m| m.len() != d || m.iter().any(|v| !v.is_finite())) {
                return Err(Error::InvalidGenerator("means must share a positive dimension".into()));
            }
        }
        Generator::Circles { radii, noise } => {
            if radii.is_empty() || radii.iter().any(|&r| !(r >= 0.0 && r.is_finite())) {
                return Err(Error::InvalidGenerator("radii must be nonnegative".into()));
            }
            check_noise(*noise)?;
        }
        Generator::Moons { noise } => check_noise(*noise)?,
    }
    Ok(())
}

fn check_noise(noise: f64) -> Result<()> {
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::InvalidGenerator("noise must be nonnegative".into()));
    }
    Ok(())
}

/// Draws `spec.n_points` points; the label of each row is its component.
pub fn generate<R: Rng + ?Sized>(spec: &GeneratorSpec, rng: &mut R) -> Result<Dataset> {
    validate(spec)?;
    let n = spec.n_points;
    let d = spec.generator.dim();
    let mut data = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    match &spec.generator {
        Generator::GaussianMixture {
            weights,
            means,
            covariances,
        } => {
            let roots = covariances
                .iter()
                .enumerate()
                .map(|(c, cov)| covariance_root(cov, d, c))
                .collect::<Result<Vec<_>>>()?;
            let pick = WeightedIndex::new(weights)
                .map_err(|e| Error::InvalidGenerator(e.to_string()))?;
            let mut z = vec![0.0; d];
            for _ in 0..n {
                let c = pick.sample(rng);
                z.iter_mut().for_each(|v| *v = StandardNormal.sample(rng));
                for (i, mu) in means[c].iter().enumerate() {
                    let row = &roots[c][i * d..(i + 1) * d];
                    data.push(mu + row.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>());
                }
                labels.push(c);
            }
        }
        Generator::Circles { radii, noise } => {
            for _ in 0..n {
                let c = rng.random_range(0..radii.len());
                let theta = rng.random_range(0.0..2.0 * PI);
                let (s, co) = theta.sin_cos();
                data.push(radii[c] * co + noise * gaussian(rng));
                data.push(radii[c] * s + noise * gaussian(rng));
                labels.push(c);
            }
        }
        Generator::Moons { noise } => {
            for _ in 0..n {
                let c = rng.random_range(0..2usize);
                let theta = rng.random_range(0.0..=PI);
                let (s, co) = theta.sin_cos();
                let (x, y) = if c == 0 {
                    (co, s)
                } else {
                    (1.0 - co, 1.0 - s - 0.5)
                };
                data.push(x + noise * gaussian(rng));
                data.push(y + noise * gaussian(rng));
                labels.push(c);
            }
        }
    }
    Dataset::new(n, d, data)?.with_labels(labels)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Centers every column and scales it to unit sample standard deviation
/// (denominator `n - 1`). Zero-variance columns are only centered.
pub fn z_transform(data: &Dataset) -> Result<Dataset> {
    let n = data.rows();
    if n < 2 {
        return Err(Error::TooFewRows { rows: n, min: 2 });
    }
    let d = data.cols();
    let mean = data.mean();
    let mut var = vec![0.0; d];
    for row in data.iter_rows() {
        for ((v, &x), &m) in var.iter_mut().zip(row).zip(&mean) {
            *v += (x - m) * (x - m);
        }
    }
    let sd: Vec<f64> = var.iter().map(|v| (v / (n - 1) as f64).sqrt()).collect();
    let mut out = Vec::with_capacity(n * d);
    for row in data.iter_rows() {
        for ((&x, &m), &s) in row.iter().zip(&mean).zip(&sd) {
            let c = x - m;
            out.push(if s > 0.0 { c / s } else { c });
        }
    }
    Ok(Dataset::from_parts_unchecked(
        n,
        d,
        out,
        data.labels().map(<[usize]>::to_vec),
    ))
}

/// The synthetic rows of the unimodality benchmark, with whether each is
/// multimodal by construction.
pub fn benchmark_generators() -> Vec<(&'static str, Generator, bool)> {
    let three = |t: f64, d: usize| {
        Generator::isotropic_mixture(vec![vec![t; d], vec![0.0; d], vec![-t; d]])
    };
    vec![
        ("single_2d_gaussian", Generator::isotropic_mixture(vec![vec![0.0; 2]]), false),
        ("single_3d_gaussian", Generator::isotropic_mixture(vec![vec![0.0; 3]]), false),
        (
            "two_2d_circles",
            Generator::Circles {
                radii: vec![0.5, 1.0],
                noise: 0.05,
            },
            true,
        ),
        ("two_2d_moons", Generator::Moons { noise: 0.05 }, true),
        (
            "two_2d_gaussians",
            Generator::isotropic_mixture(vec![vec![1.0, 4.0], vec![2.0, 1.0]]),
            true,
        ),
        ("three_2d_gaussians", three(2.5, 2), true),
        (
            "two_3d_gaussians",
            Generator::isotropic_mixture(vec![vec![1.0, 4.0, 2.0], vec![1.0, -2.0, 3.0]]),
            true,
        ),
        ("three_3d_gaussians", three(2.9, 3), true),
    ]
}

/// Looks up one of [`benchmark_generators`] by name.
pub fn benchmark_generator(name: &str) -> Option<Generator> {
    benchmark_generators()
        .into_iter()
        .find(|(n, _, _)| *n == name)
        .map(|(_, g, _)| g)
}
