//! Sample covariance, symmetric inverse square roots and Mahalanobis distances.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Relative threshold (on `trace / d`) below which the smallest eigenvalue
/// triggers the ridge.
pub const RIDGE_TRIGGER: f64 = 1e-10;
/// Ridge magnitude relative to `trace / d`.
pub const RIDGE_SCALE: f64 = 1e-6;

const SYMMETRY_TOL: f64 = 1e-8;

/// Sample covariance with denominator `n - 1`.
pub fn covariance(data: &Dataset) -> Result<DMatrix<f64>> {
    let n = data.rows();
    if n < 2 {
        return Err(Error::TooFewRows { rows: n, min: 2 });
    }
    let d = data.cols();
    let mean = data.mean();
    let mut cov = DMatrix::<f64>::zeros(d, d);
    let mut centered = vec![0.0; d];
    for row in data.iter_rows() {
        for ((c, &v), &m) in centered.iter_mut().zip(row).zip(&mean) {
            *c = v - m;
        }
        for a in 0..d {
            let ca = centered[a];
            for b in a..d {
                cov[(a, b)] += ca * centered[b];
            }
        }
    }
    let denom = (n - 1) as f64;
    for a in 0..d {
        for b in a..d {
            let v = cov[(a, b)] / denom;
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    Ok(cov)
}

/// `W = (Σ + λI)^{-1/2}`, symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct WhiteningFactor {
    factor: DMatrix<f64>,
    ridge: f64,
}

impl WhiteningFactor {
    pub fn identity(dim: usize) -> Self {
        Self {
            factor: DMatrix::identity(dim, dim),
            ridge: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.factor.nrows()
    }

    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    /// The ridge `λ` that was added before inverting.
    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    /// `W x`.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let d = self.dim();
        for (i, o) in out.iter_mut().enumerate().take(d) {
            // W is symmetric, so row i equals column i; columns are contiguous.
            let col = self.factor.column(i);
            *o = col.iter().zip(x).map(|(w, v)| w * v).sum();
        }
    }

    /// Whitens every row of `data`.
    pub fn whiten(&self, data: &Dataset) -> Result<Dataset> {
        check_dim(self.dim(), data.cols())?;
        let d = data.cols();
        let mut out = vec![0.0; data.rows() * d];
        for (row, dst) in data.iter_rows().zip(out.chunks_exact_mut(d)) {
            self.apply(row, dst);
        }
        Ok(Dataset::from_parts_unchecked(
            data.rows(),
            d,
            out,
            data.labels().map(<[usize]>::to_vec),
        ))
    }
}

/// Builds the whitening factor of a covariance matrix through its symmetric
/// eigendecomposition.
///
/// A ridge `λ = 1e-6 · trace/d` is added when the smallest eigenvalue falls
/// below `1e-10 · trace/d`; eigenvalues of `Σ + λI` still below that floor
/// (round-off) are raised to it. The all-zero matrix whitens to the identity,
/// since every distance it could scale is zero.
pub fn whitening_factor(sigma: &DMatrix<f64>) -> Result<WhiteningFactor> {
    let d = sigma.nrows();
    if sigma.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: sigma.ncols(),
        });
    }
    let scale = sigma.amax().max(f64::MIN_POSITIVE);
    let asymmetry = (sigma - sigma.transpose()).amax();
    if !(asymmetry <= SYMMETRY_TOL * scale) {
        return Err(Error::NotSymmetric { asymmetry });
    }
    let trace = sigma.trace();
    if !trace.is_finite() {
        return Err(Error::NonFiniteEigenvalue);
    }
    if trace <= 0.0 {
        return Ok(WhiteningFactor::identity(d));
    }
    let sym = (sigma + sigma.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteEigenvalue);
    }
    let level = trace / d as f64;
    let floor = RIDGE_TRIGGER * level;
    let smallest = eig.eigenvalues.min();
    let ridge = if smallest < floor {
        RIDGE_SCALE * level
    } else {
        0.0
    };
    let inv_sqrt = eig
        .eigenvalues
        .map(|mu| 1.0 / (mu + ridge).max(floor).sqrt());
    let v = &eig.eigenvectors;
    let factor = v * DMatrix::from_diagonal(&inv_sqrt) * v.transpose();
    let factor = (&factor + factor.transpose()) * 0.5;
    Ok(WhiteningFactor { factor, ridge })
}

/// Euclidean norms of `W (x_i - observer)`, skipping row `exclude` if given.
pub fn mahalanobis_distances(
    data: &Dataset,
    observer: &[f64],
    w: &WhiteningFactor,
    exclude: Option<usize>,
) -> Result<Vec<f64>> {
    check_dim(data.cols(), observer.len())?;
    check_dim(data.cols(), w.dim())?;
    let d = data.cols();
    let mut diff = vec![0.0; d];
    let mut white = vec![0.0; d];
    let mut out = Vec::with_capacity(data.rows());
    for (i, row) in data.iter_rows().enumerate() {
        if Some(i) == exclude {
            continue;
        }
        for ((t, &x), &o) in diff.iter_mut().zip(row).zip(observer) {
            *t = x - o;
        }
        w.apply(&diff, &mut white);
        out.push(norm(&white));
    }
    Ok(out)
}

/// Euclidean distances of every row to `point`, skipping row `exclude`.
pub(crate) fn euclidean_distances(data: &Dataset, point: &[f64], exclude: Option<usize>) -> Vec<f64> {
    data.iter_rows()
        .enumerate()
        .filter(|(i, _)| Some(*i) != exclude)
        .map(|(_, row)| {
            row.iter()
                .zip(point)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// `‖W (Σ + λI) W − I‖_F / √d`.
pub fn whitening_residual(sigma: &DMatrix<f64>, w: &WhiteningFactor) -> f64 {
    let d = sigma.nrows();
    let regularised = sigma + DMatrix::identity(d, d) * w.ridge();
    let product = w.factor() * regularised * w.factor();
    (product - DMatrix::<f64>::identity(d, d)).norm() / (d as f64).sqrt()
}
