//! mp-means: incremental k-means that keeps splitting the most multimodal
//! cluster, as judged by mud-pod, until every cluster tests unimodal.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{invalid, Error, Result};
use crate::mudpod::{mudpod_test, MudpodConfig, Verdict, MIN_POINTS};
use crate::seed;

const ROUND_TAG: u64 = 0x726f_756e_64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    /// New centers at the cluster mean ± its per-feature standard deviation.
    MeanStd,
    /// Mean ± std seeds refined by 2-means on the cluster alone.
    TwoMeans,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpMeansConfig {
    pub mudpod: MudpodConfig,
    pub k_max: usize,
    /// Clusters smaller than this are unimodal without testing.
    pub n_min: usize,
    pub kmeans_max_iters: usize,
    /// Lloyd stops once the largest center shift, relative to the data's RMS
    /// radius, falls below this.
    pub kmeans_tol: f64,
    pub split: SplitMode,
    pub seed: u64,
}

impl Default for MpMeansConfig {
    fn default() -> Self {
        Self {
            mudpod: MudpodConfig::default(),
            k_max: 300,
            n_min: MIN_POINTS,
            kmeans_max_iters: 300,
            kmeans_tol: 1e-6,
            split: SplitMode::MeanStd,
            seed: 0,
        }
    }
}

impl MpMeansConfig {
    pub fn validate(&self) -> Result<()> {
        self.mudpod.validate()?;
        if self.k_max == 0 {
            return Err(invalid("k_max", "must be at least 1"));
        }
        if self.n_min < MIN_POINTS {
            return Err(invalid("n_min", format!("must be at least {MIN_POINTS}")));
        }
        if self.kmeans_max_iters == 0 {
            return Err(invalid("kmeans_max_iters", "must be at least 1"));
        }
        if !(self.kmeans_tol >= 0.0) {
            return Err(invalid("kmeans_tol", "must be nonnegative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub size: usize,
    /// False when the cluster was below `n_min` and declared unimodal.
    pub tested: bool,
    pub verdict: Verdict,
    pub rejection_fraction: f64,
    /// Mean dip over the cluster's views; the split ranking score.
    pub mean_dip: f64,
    /// Seed the cluster's mud-pod run used.
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    AllUnimodal,
    KMax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub round: usize,
    pub cluster: usize,
    pub mean_dip: f64,
    pub rejection_fraction: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringState {
    pub k: usize,
    pub centers: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub cluster_reports: Vec<ClusterReport>,
    pub stop_reason: StopReason,
    pub splits: Vec<SplitRecord>,
}

impl ClusteringState {
    pub fn cluster_sizes(&self) -> Vec<usize> {
        cluster_sizes(&self.labels, self.k)
    }
}

/// Result of a Lloyd run.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub centers: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub iterations: usize,
    /// Within-cluster sum of squares after each assignment step.
    pub wcss_history: Vec<f64>,
    /// Iterations (0-based) in which an empty cluster was re-seeded.
    pub repairs: Vec<usize>,
}

impl KMeansFit {
    pub fn final_wcss(&self) -> f64 {
        *self.wcss_history.last().expect("at least one assignment")
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(row: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centers.iter().enumerate() {
        let d = sq_dist(row, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn cluster_sizes(labels: &[usize], k: usize) -> Vec<usize> {
    let mut sizes = vec![0; k];
    labels.iter().for_each(|&l| sizes[l] += 1);
    sizes
}

/// Assigns every row to its nearest center and re-seeds empty clusters at the
/// point farthest from its own center. Returns whether a repair happened.
fn assign(data: &Dataset, centers: &mut [Vec<f64>], labels: &mut [usize], dist: &mut [f64]) -> bool {
    for (i, row) in data.iter_rows().enumerate() {
        let (j, d) = nearest(row, centers);
        labels[i] = j;
        dist[i] = d;
    }
    let k = centers.len();
    let mut sizes = cluster_sizes(labels, k);
    let mut repaired = false;
    for empty in 0..k {
        if sizes[empty] > 0 {
            continue;
        }
        let donor = (0..labels.len())
            .filter(|&i| sizes[labels[i]] > 1)
            .max_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(b.cmp(&a)));
        let Some(i) = donor else { break };
        sizes[labels[i]] -= 1;
        sizes[empty] = 1;
        labels[i] = empty;
        dist[i] = 0.0;
        centers[empty] = data.row(i).to_vec();
        repaired = true;
    }
    repaired
}

/// Lloyd's algorithm from the given centers.
pub fn kmeans_refine(data: &Dataset, centers: &[Vec<f64>], max_iters: usize, tol: f64) -> Result<KMeansFit> {
    if centers.is_empty() {
        return Err(invalid("centers", "at least one center is required"));
    }
    let d = data.cols();
    if let Some(c) = centers.iter().find(|c| c.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: c.len(),
        });
    }
    if centers.iter().flatten().any(|v| !v.is_finite()) {
        return Err(invalid("centers", "must be finite"));
    }
    let n = data.rows();
    let k = centers.len();
    let global = data.mean();
    let rms = (data.iter_rows().map(|r| sq_dist(r, &global)).sum::<f64>() / n as f64).sqrt();
    let scale = if rms > 0.0 { rms } else { 1.0 };

    let mut centers = centers.to_vec();
    let mut labels = vec![0usize; n];
    let mut dist = vec![0.0; n];
    let mut wcss_history = Vec::new();
    let mut repairs = Vec::new();
    let mut iterations = 0;

    for iter in 0..max_iters {
        iterations = iter + 1;
        if assign(data, &mut centers, &mut labels, &mut dist) {
            repairs.push(iter);
        }
        wcss_history.push(dist.iter().sum());

        let mut sums = vec![vec![0.0; d]; k];
        let sizes = cluster_sizes(&labels, k);
        for (row, &l) in data.iter_rows().zip(&labels) {
            sums[l].iter_mut().zip(row).for_each(|(s, v)| *s += v);
        }
        let mut shift = 0.0f64;
        for (j, sum) in sums.into_iter().enumerate() {
            if sizes[j] == 0 {
                continue;
            }
            let new: Vec<f64> = sum.into_iter().map(|s| s / sizes[j] as f64).collect();
            shift = shift.max(sq_dist(&new, &centers[j]).sqrt() / scale);
            centers[j] = new;
        }
        if shift < tol {
            break;
        }
    }
    // Labels consistent with the final centers.
    if assign(data, &mut centers, &mut labels, &mut dist) {
        repairs.push(iterations);
    }
    wcss_history.push(dist.iter().sum());

    Ok(KMeansFit {
        centers,
        labels,
        iterations,
        wcss_history,
        repairs,
    })
}

/// Mean ± standard deviation (denominator `n − 1`) of one cluster.
pub fn split_cluster(data: &Dataset, labels: &[usize], cluster_id: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == cluster_id).collect();
    if members.len() < 2 {
        return Err(Error::SingletonCluster {
            cluster: cluster_id,
            size: members.len(),
        });
    }
    let sub = data.select(&members);
    let mean = sub.mean();
    let m = members.len() as f64;
    let mut var = vec![0.0; data.cols()];
    for row in sub.iter_rows() {
        for ((v, x), mu) in var.iter_mut().zip(row).zip(&mean) {
            *v += (x - mu) * (x - mu);
        }
    }
    let sd: Vec<f64> = var.iter().map(|v| (v / (m - 1.0)).sqrt()).collect();
    let plus = mean.iter().zip(&sd).map(|(mu, s)| mu + s).collect();
    let minus = mean.iter().zip(&sd).map(|(mu, s)| mu - s).collect();
    Ok((plus, minus))
}

fn test_clusters(
    data: &Dataset,
    labels: &[usize],
    k: usize,
    round: usize,
    config: &MpMeansConfig,
) -> Result<Vec<ClusterReport>> {
    let mut members = vec![Vec::new(); k];
    for (i, &l) in labels.iter().enumerate() {
        members[l].push(i);
    }
    members
        .par_iter()
        .enumerate()
        .map(|(c, idx)| {
            let cluster_seed = seed::derive(config.seed, &[ROUND_TAG, round as u64, c as u64]);
            if idx.len() < config.n_min {
                return Ok(ClusterReport {
                    size: idx.len(),
                    tested: false,
                    verdict: Verdict::Unimodal,
                    rejection_fraction: 0.0,
                    mean_dip: 0.0,
                    seed: cluster_seed,
                });
            }
            let mut cfg = config.mudpod.clone();
            cfg.seed = cluster_seed;
            let result = mudpod_test(&data.select(idx), &cfg)?;
            Ok(ClusterReport {
                size: idx.len(),
                tested: true,
                verdict: result.verdict,
                rejection_fraction: result.rejection_fraction,
                mean_dip: result.mean_dip(),
                seed: cluster_seed,
            })
        })
        .collect()
}

/// Index of the multimodal cluster to split: highest mean dip, then larger
/// rejection fraction, then larger size, then lower id.
fn pick_split(reports: &[ClusterReport]) -> Option<usize> {
    reports
        .iter()
        .enumerate()
        .filter(|(_, r)| r.verdict.is_multimodal())
        .max_by(|(ia, a), (ib, b)| {
            a.mean_dip
                .total_cmp(&b.mean_dip)
                .then(a.rejection_fraction.total_cmp(&b.rejection_fraction))
                .then(a.size.cmp(&b.size))
                .then(ib.cmp(ia))
        })
        .map(|(i, _)| i)
}

/// Runs mp-means to completion.
pub fn mp_means(data: &Dataset, config: &MpMeansConfig) -> Result<ClusteringState> {
    config.validate()?;
    let mut centers = vec![data.mean()];
    let mut labels = vec![0usize; data.rows()];
    let mut splits = Vec::new();

    for round in 0.. {
        let k = centers.len();
        let reports = test_clusters(data, &labels, k, round, config)?;
        // Reaching k_max takes precedence, so `k_max = 1` always reports it.
        let stop = if k >= config.k_max {
            Some(StopReason::KMax)
        } else if pick_split(&reports).is_none() {
            Some(StopReason::AllUnimodal)
        } else {
            None
        };
        if let Some(stop_reason) = stop {
            return Ok(ClusteringState {
                k,
                centers,
                labels,
                cluster_reports: reports,
                stop_reason,
                splits,
            });
        }
        let target = pick_split(&reports).expect("a multimodal cluster exists");
        let report = &reports[target];
        splits.push(SplitRecord {
            round,
            cluster: target,
            mean_dip: report.mean_dip,
            rejection_fraction: report.rejection_fraction,
            size: report.size,
        });

        let (plus, minus) = split_cluster(data, &labels, target)?;
        let (plus, minus) = match config.split {
            SplitMode::MeanStd => (plus, minus),
            SplitMode::TwoMeans => {
                let idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == target).collect();
                let fit = kmeans_refine(
                    &data.select(&idx),
                    &[plus, minus],
                    config.kmeans_max_iters,
                    config.kmeans_tol,
                )?;
                let mut it = fit.centers.into_iter();
                (it.next().unwrap(), it.next().unwrap())
            }
        };
        centers[target] = plus;
        centers.push(minus);
        let fit = kmeans_refine(data, &centers, config.kmeans_max_iters, config.kmeans_tol)?;
        centers = fit.centers;
        labels = fit.labels;
    }
    unreachable!("the round loop only exits by returning")
}
