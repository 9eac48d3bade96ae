//! Gaussian random projections at the Johnson–Lindenstrauss dimension.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::Dataset;
use crate::error::{invalid, Error, Result};
use crate::seed;

/// `min(d, ⌈8 ln(n) / ε²⌉)`, never below 1.
pub fn jl_dimension(n_points: usize, epsilon: f64, source_dim: usize) -> Result<usize> {
    if n_points < 2 {
        return Err(invalid("n_points", "the JL dimension needs at least 2 points"));
    }
    check_epsilon(epsilon)?;
    if source_dim == 0 {
        return Err(invalid("source_dim", "must be positive"));
    }
    let q = (8.0 * (n_points as f64).ln() / (epsilon * epsilon)).ceil() as usize;
    Ok(q.clamp(1, source_dim))
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(invalid("epsilon", format!("must lie in (0, 1], got {epsilon}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionSpec {
    pub source_dim: usize,
    pub target_dim: usize,
    pub epsilon: f64,
    pub seed: u64,
}

impl ProjectionSpec {
    /// Spec for projecting `n_points` points of dimension `source_dim`.
    pub fn for_points(n_points: usize, source_dim: usize, epsilon: f64, seed: u64) -> Result<Self> {
        Ok(Self {
            source_dim,
            target_dim: jl_dimension(n_points, epsilon, source_dim)?,
            epsilon,
            seed,
        })
    }

    pub fn validate(&self) -> Result<()> {
        check_epsilon(self.epsilon)?;
        if self.target_dim == 0 || self.target_dim > self.source_dim {
            return Err(invalid(
                "target_dim",
                format!("must lie in [1, {}], got {}", self.source_dim, self.target_dim),
            ));
        }
        Ok(())
    }

    /// Samples the matrix from the stream keyed by `self.seed`.
    pub fn sample(&self) -> Result<ProjectionMatrix> {
        sample_projection(self, &mut seed::stream(self.seed))
    }
}

/// A dense `d × q` matrix, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionMatrix {
    source_dim: usize,
    target_dim: usize,
    entries: Vec<f64>,
}

impl ProjectionMatrix {
    pub fn from_row_major(source_dim: usize, target_dim: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != source_dim * target_dim {
            return Err(Error::DimensionMismatch {
                expected: source_dim * target_dim,
                got: entries.len(),
            });
        }
        Ok(Self {
            source_dim,
            target_dim,
            entries,
        })
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1.0;
        }
        Self {
            source_dim: dim,
            target_dim: dim,
            entries,
        }
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.target_dim + col]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

/// Draws `Π` with i.i.d. `N(0, 1/d)` entries.
pub fn sample_projection<R: Rng + ?Sized>(spec: &ProjectionSpec, rng: &mut R) -> Result<ProjectionMatrix> {
    spec.validate()?;
    let normal = Normal::new(0.0, (1.0 / spec.source_dim as f64).sqrt())
        .expect("standard deviation is finite and positive");
    let entries = (0..spec.source_dim * spec.target_dim)
        .map(|_| normal.sample(rng))
        .collect();
    Ok(ProjectionMatrix {
        source_dim: spec.source_dim,
        target_dim: spec.target_dim,
        entries,
    })
}

/// Maps every row `x` to `x Π`. Labels are carried through.
pub fn project(data: &Dataset, pi: &ProjectionMatrix) -> Result<Dataset> {
    if data.cols() != pi.source_dim {
        return Err(Error::DimensionMismatch {
            expected: pi.source_dim,
            got: data.cols(),
        });
    }
    let q = pi.target_dim;
    let mut out = vec![0.0; data.rows() * q];
    for (row, dst) in data.iter_rows().zip(out.chunks_exact_mut(q)) {
        for (&x, weights) in row.iter().zip(pi.entries.chunks_exact(q)) {
            if x == 0.0 {
                continue;
            }
            for (o, &w) in dst.iter_mut().zip(weights) {
                *o += x * w;
            }
        }
    }
    Ok(Dataset::from_parts_unchecked(
        data.rows(),
        q,
        out,
        data.labels().map(<[usize]>::to_vec),
    ))
}
