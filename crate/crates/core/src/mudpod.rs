//! The mud-pod multivariate unimodality test.
//!
//! Each of `M` random views projects the data to the JL dimension, picks an
//! observer far from the centroid, and dip-tests the (α-exponentiated)
//! distances from that observer to every other point. The test statistic is
//! the fraction of views whose dip p-value is at most the significance level.

use std::borrow::Cow;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::dip::{self, hartigan_dip};
use crate::error::{invalid, Error, Result};
use crate::mahalanobis::{covariance, euclidean_distances, whitening_factor};
use crate::projection::{project, ProjectionSpec};
use crate::seed;

/// Fewest rows mud-pod accepts.
pub const MIN_POINTS: usize = 8;

/// Seed of the shared bootstrap null stream unless overridden.
pub const DEFAULT_NULL_SEED: u64 = 0x6e75_6c6c;

const VIEW_TAG: u64 = 0x7669_6577;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    /// Work on the raw coordinates.
    Original,
    /// Gaussian random projection at the JL dimension.
    Projected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Distance {
    Euclidean,
    Mahalanobis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ObserverStrategy {
    /// Uniform over all points.
    Random,
    /// Uniform over points at or beyond the p-quantile of distance from the mean.
    Percentile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Unimodal,
    Multimodal,
}

impl Verdict {
    pub fn is_multimodal(self) -> bool {
        self == Verdict::Multimodal
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Unimodal => "unimodal",
            Verdict::Multimodal => "multimodal",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MudpodConfig {
    /// Unimodality index; distances are raised to this power before the dip test.
    pub alpha: f64,
    pub n_views: usize,
    pub epsilon: f64,
    pub percentile: f64,
    /// Per-view significance level `a`.
    pub significance: f64,
    /// Multimodal iff the rejecting fraction exceeds this.
    pub verdict_threshold: f64,
    pub n_bootstrap: usize,
    pub seed: u64,
    /// Seed of the bootstrap null stream shared by all views.
    pub null_seed: u64,
    pub space: Space,
    pub distance: Distance,
    pub observer: ObserverStrategy,
}

impl Default for MudpodConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            n_views: 100,
            epsilon: 0.99,
            percentile: 0.99,
            significance: 0.01,
            verdict_threshold: 0.01,
            n_bootstrap: dip::DEFAULT_BOOTSTRAP,
            seed: 0,
            null_seed: DEFAULT_NULL_SEED,
            space: Space::Projected,
            distance: Distance::Mahalanobis,
            observer: ObserverStrategy::Percentile,
        }
    }
}

impl MudpodConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(invalid("alpha", "must be a positive finite real"));
        }
        if self.n_views == 0 {
            return Err(invalid("n_views", "must be at least 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(invalid("epsilon", "must lie in (0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.percentile) {
            return Err(invalid("percentile", "must lie in [0, 1]"));
        }
        if !(self.significance > 0.0 && self.significance < 1.0) {
            return Err(invalid("significance", "must lie in (0, 1)"));
        }
        if !(0.0..1.0).contains(&self.verdict_threshold) {
            return Err(invalid("verdict_threshold", "must lie in [0, 1)"));
        }
        if self.n_bootstrap == 0 {
            return Err(invalid("n_bootstrap", "must be at least 1"));
        }
        Ok(())
    }
}

/// One (projection, observer) pair and the dip test it produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct View {
    pub view_index: usize,
    pub projection_seed: u64,
    /// Dimension the view worked in (the source dimension for `Space::Original`).
    pub dim: usize,
    pub observer_row: usize,
    pub dip: f64,
    pub dip_pvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MudpodResult {
    pub rejection_fraction: f64,
    pub views: Vec<View>,
    pub verdict: Verdict,
    pub config_echo: MudpodConfig,
}

impl MudpodResult {
    fn assemble(mut views: Vec<View>, config: &MudpodConfig) -> Self {
        views.sort_by_key(|v| v.view_index);
        let rejection_fraction = rejection_fraction(&views, config.significance);
        Self {
            rejection_fraction,
            verdict: verdict_for(rejection_fraction, config.verdict_threshold),
            views,
            config_echo: config.clone(),
        }
    }

    /// Rejection fraction at another significance level, views held fixed.
    pub fn fraction_at(&self, significance: f64) -> f64 {
        rejection_fraction(&self.views, significance)
    }

    /// Verdict at another significance level, views and threshold held fixed.
    pub fn verdict_at(&self, significance: f64) -> Verdict {
        verdict_for(self.fraction_at(significance), self.config_echo.verdict_threshold)
    }

    pub fn mean_dip(&self) -> f64 {
        self.views.iter().map(|v| v.dip).sum::<f64>() / self.views.len() as f64
    }

    pub fn cdf(&self) -> ViewCdf {
        empirical_view_cdf(&self.views)
    }
}

fn rejection_fraction(views: &[View], significance: f64) -> f64 {
    let rejecting = views.iter().filter(|v| v.dip_pvalue <= significance).count();
    rejecting as f64 / views.len() as f64
}

fn verdict_for(fraction: f64, threshold: f64) -> Verdict {
    if fraction > threshold {
        Verdict::Multimodal
    } else {
        Verdict::Unimodal
    }
}

/// Picks an observer row from distances to the sample mean.
pub fn select_observer<R: Rng + ?Sized>(
    distances_from_mean: &[f64],
    percentile: f64,
    strategy: ObserverStrategy,
    rng: &mut R,
) -> Result<usize> {
    if distances_from_mean.is_empty() {
        return Err(invalid("distances_from_mean", "must be nonempty"));
    }
    if !(0.0..=1.0).contains(&percentile) {
        return Err(invalid("percentile", "must lie in [0, 1]"));
    }
    match strategy {
        ObserverStrategy::Random => Ok(rng.random_range(0..distances_from_mean.len())),
        ObserverStrategy::Percentile => {
            let cut = quantile(distances_from_mean, percentile);
            let candidates: Vec<usize> = distances_from_mean
                .iter()
                .enumerate()
                .filter(|(_, &d)| d >= cut)
                .map(|(i, _)| i)
                .collect();
            Ok(candidates[rng.random_range(0..candidates.len())])
        }
    }
}

/// Linearly interpolated empirical quantile, clamped to the sample maximum.
pub fn quantile(values: &[f64], p: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let q = sorted[lo] + (sorted[hi] - sorted[lo]) * (h - lo as f64);
    q.min(sorted[sorted.len() - 1])
}

/// Runs one view. Fully determined by `(data, config, view_index)`.
pub fn run_view(data: &Dataset, config: &MudpodConfig, view_index: usize) -> Result<View> {
    let n = data.rows();
    if n < MIN_POINTS {
        return Err(Error::TooFewRows { rows: n, min: MIN_POINTS });
    }
    let projection_seed = seed::derive(config.seed, &[VIEW_TAG, view_index as u64, 0]);
    let mut observer_rng = seed::substream(config.seed, &[VIEW_TAG, view_index as u64, 1]);

    let points: Cow<'_, Dataset> = match config.space {
        Space::Original => Cow::Borrowed(data),
        Space::Projected => {
            let spec = ProjectionSpec::for_points(n, data.cols(), config.epsilon, projection_seed)?;
            Cow::Owned(project(data, &spec.sample()?)?)
        }
    };
    let points: Cow<'_, Dataset> = match config.distance {
        Distance::Euclidean => points,
        Distance::Mahalanobis => {
            let w = whitening_factor(&covariance(&points)?)?;
            Cow::Owned(w.whiten(&points)?)
        }
    };

    let centroid = points.mean();
    let from_mean = euclidean_distances(&points, &centroid, None);
    let observer_row = select_observer(&from_mean, config.percentile, config.observer, &mut observer_rng)?;

    let mut distances = euclidean_distances(&points, points.row(observer_row), Some(observer_row));
    if config.alpha != 1.0 {
        distances.iter_mut().for_each(|d| *d = d.powf(config.alpha));
    }
    distances.sort_unstable_by(f64::total_cmp);
    let m = distances.len();
    let dip = hartigan_dip(&distances).dip;
    let dip_pvalue = if distances[0] == distances[m - 1] {
        // A point mass is unimodal for every α.
        1.0
    } else {
        dip::cached_null(m, config.n_bootstrap, config.null_seed).p_value(dip)
    };

    Ok(View {
        view_index,
        projection_seed,
        dim: points.cols(),
        observer_row,
        dip,
        dip_pvalue,
    })
}

/// Runs the full test. Views execute in parallel; the result does not depend
/// on scheduling.
pub fn mudpod_test(data: &Dataset, config: &MudpodConfig) -> Result<MudpodResult> {
    config.validate()?;
    if data.rows() < MIN_POINTS {
        return Err(Error::TooFewRows {
            rows: data.rows(),
            min: MIN_POINTS,
        });
    }
    let views = (0..config.n_views)
        .into_par_iter()
        .map(|i| run_view(data, config, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(MudpodResult::assemble(views, config))
}

/// Empirical c.d.f. of per-view dip p-values, `Ĵ(t) = M⁻¹ #{p_i ≤ t}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewCdf {
    sorted: Vec<f64>,
}

impl ViewCdf {
    pub fn eval(&self, t: f64) -> f64 {
        self.sorted.partition_point(|&p| p <= t) as f64 / self.sorted.len() as f64
    }

    /// Jump locations, ascending.
    pub fn support(&self) -> &[f64] {
        &self.sorted
    }

    /// `sup_t |Ĵ_self(t) − Ĵ_other(t)|`.
    pub fn sup_distance(&self, other: &ViewCdf) -> f64 {
        self.sorted
            .iter()
            .chain(&other.sorted)
            .map(|&t| (self.eval(t) - other.eval(t)).abs())
            .fold(0.0, f64::max)
    }
}

pub fn empirical_view_cdf(views: &[View]) -> ViewCdf {
    assert!(!views.is_empty(), "Ĵ needs at least one view");
    let mut sorted: Vec<f64> = views.iter().map(|v| v.dip_pvalue).collect();
    sorted.sort_unstable_by(f64::total_cmp);
    ViewCdf { sorted }
}
