//! Benchmark suites: detection rates on the synthetic generators, the
//! space × distance × observer ablation grid, and the mp-means error sweep
//! over the number of views.
//!
//! Every suite returns raw per-run records plus an aggregate table, and every
//! record carries the seeds needed to reproduce it.

use std::path::{Path, PathBuf};

use nalgebra::{Matrix2, Vector2};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::{benchmark_generator, benchmark_generators, Generator, GeneratorSpec};
use crate::error::{invalid, Result};
use crate::evaluation::{nmi, relative_k_error};
use crate::mpmeans::{mp_means, MpMeansConfig};
use crate::mudpod::{mudpod_test, Distance, MudpodConfig, ObserverStrategy, Space, Verdict};
use crate::seed;

const TABLE_TAG: u64 = 0x7461_626c;
const ABLATION_TAG: u64 = 0x6162_6c61;
const SWEEP_TAG: u64 = 0x7377_6570;

/// View counts swept by [`mcsweep`] unless overridden.
pub const SWEEP_VIEWS: [usize; 6] = [5, 10, 25, 50, 100, 200];
/// Generators swept by [`mcsweep`] unless overridden.
pub const SWEEP_GENERATORS: [&str; 2] = ["three_2d_gaussians", "three_3d_gaussians"];
/// Largest Mahalanobis separation drawn for the ablation mixtures.
pub const MAX_SEPARATION: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Table1,
    Ablation,
    Mcsweep,
}

impl std::fmt::Display for Suite {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Suite::Table1 => "table1",
            Suite::Ablation => "ablation",
            Suite::Mcsweep => "mcsweep",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub runs: usize,
    pub seed: u64,
    pub n_points: usize,
    /// Mixtures in the ablation family.
    pub n_mixtures: usize,
    /// Base test configuration; suites override the fields they vary.
    pub mudpod: MudpodConfig,
    pub sweep_views: Vec<usize>,
    pub sweep_generators: Vec<String>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            runs: 10,
            seed: 0,
            n_points: 1000,
            n_mixtures: 100,
            mudpod: MudpodConfig::default(),
            sweep_views: SWEEP_VIEWS.to_vec(),
            sweep_generators: SWEEP_GENERATORS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        self.mudpod.validate()?;
        if self.runs == 0 {
            return Err(invalid("runs", "must be at least 1"));
        }
        if self.n_points < crate::mudpod::MIN_POINTS {
            return Err(invalid("n_points", "must be at least 8"));
        }
        if self.n_mixtures == 0 {
            return Err(invalid("n_mixtures", "must be at least 1"));
        }
        if self.sweep_views.is_empty() || self.sweep_views.contains(&0) {
            return Err(invalid("sweep_views", "must be nonempty and positive"));
        }
        for g in &self.sweep_generators {
            if benchmark_generator(g).is_none() {
                return Err(invalid("sweep_generators", format!("unknown generator `{g}`")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Run {
    pub generator: String,
    pub run: usize,
    pub multimodal_by_construction: bool,
    pub data_seed: u64,
    pub test_seed: u64,
    pub rejection_fraction: f64,
    pub mean_dip: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub generator: String,
    pub multimodal_by_construction: bool,
    pub runs: usize,
    pub detections: usize,
    pub detection_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Result {
    pub runs: Vec<Table1Run>,
    pub summary: Vec<Table1Row>,
}

/// Runs mud-pod `runs` times on fresh samples from each benchmark generator.
pub fn table1(config: &BenchConfig) -> Result<Table1Result> {
    config.validate()?;
    let gens = benchmark_generators();
    let jobs: Vec<(usize, usize)> = (0..gens.len())
        .flat_map(|g| (0..config.runs).map(move |r| (g, r)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(g, run)| {
            let (name, generator, multimodal) = &gens[g];
            let data_seed = seed::derive(config.seed, &[TABLE_TAG, g as u64, run as u64, 0]);
            let test_seed = seed::derive(config.seed, &[TABLE_TAG, g as u64, run as u64, 1]);
            let data = GeneratorSpec::new(generator.clone(), config.n_points, data_seed).generate()?;
            let result = mudpod_test(&data, &config.mudpod.clone().with_seed(test_seed))?;
            Ok(Table1Run {
                generator: name.to_string(),
                run,
                multimodal_by_construction: *multimodal,
                data_seed,
                test_seed,
                rejection_fraction: result.rejection_fraction,
                mean_dip: result.mean_dip(),
                verdict: result.verdict,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = gens
        .iter()
        .map(|(name, _, multimodal)| {
            let detections = runs
                .iter()
                .filter(|r| r.generator == *name && r.verdict.is_multimodal())
                .count();
            Table1Row {
                generator: name.to_string(),
                multimodal_by_construction: *multimodal,
                runs: config.runs,
                detections,
                detection_pct: 100.0 * detections as f64 / config.runs as f64,
            }
        })
        .collect();
    Ok(Table1Result { runs, summary })
}

/// An equal-weight two-component 2D Gaussian mixture with a shared covariance.
/// Such a mixture is bimodal exactly when the Mahalanobis distance between the
/// means exceeds 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticMixture {
    pub separation: f64,
    pub multimodal: bool,
    pub generator: Generator,
}

/// Draws mixture `index` of the ablation family: separation uniform on
/// `[0, MAX_SEPARATION]`, covariance with a random orientation and
/// eigenvalues uniform on `[0.25, 4]`, mean offset in a random direction.
pub fn analytic_mixture(family_seed: u64, index: usize) -> AnalyticMixture {
    let mut rng = seed::substream(family_seed, &[ABLATION_TAG, index as u64]);
    let separation = rng.random_range(0.0..MAX_SEPARATION);
    let rot = rng.random_range(0.0..std::f64::consts::PI);
    let (l1, l2) = (rng.random_range(0.25..4.0), rng.random_range(0.25..4.0));
    let dir = rng.random_range(0.0..2.0 * std::f64::consts::PI);

    let r = Matrix2::new(rot.cos(), -rot.sin(), rot.sin(), rot.cos());
    let cov = r * Matrix2::new(l1, 0.0, 0.0, l2) * r.transpose();
    let root = r * Matrix2::new(l1.sqrt(), 0.0, 0.0, l2.sqrt()) * r.transpose();
    let half = root * Vector2::new(dir.cos(), dir.sin()) * (separation / 2.0);

    let cov_rows = vec![vec![cov[(0, 0)], cov[(0, 1)]], vec![cov[(1, 0)], cov[(1, 1)]]];
    AnalyticMixture {
        separation,
        multimodal: separation > 2.0,
        generator: Generator::GaussianMixture {
            weights: vec![0.5, 0.5],
            means: vec![vec![half.x, half.y], vec![-half.x, -half.y]],
            covariances: vec![cov_rows.clone(), cov_rows],
        },
    }
}

/// The eight ablation cells in a fixed order.
pub fn ablation_cells() -> Vec<(Space, Distance, ObserverStrategy)> {
    let mut cells = Vec::with_capacity(8);
    for space in [Space::Original, Space::Projected] {
        for distance in [Distance::Euclidean, Distance::Mahalanobis] {
            for observer in [ObserverStrategy::Random, ObserverStrategy::Percentile] {
                cells.push((space, distance, observer));
            }
        }
    }
    cells
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRun {
    pub mixture: usize,
    pub separation: f64,
    pub truth_multimodal: bool,
    pub run: usize,
    pub data_seed: u64,
    pub test_seed: u64,
    pub space: Space,
    pub distance: Distance,
    pub observer: ObserverStrategy,
    pub rejection_fraction: f64,
    pub verdict: Verdict,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationCell {
    pub space: Space,
    pub distance: Distance,
    pub observer: ObserverStrategy,
    pub trials: usize,
    pub agreement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationResult {
    pub runs: Vec<AblationRun>,
    pub cells: Vec<AblationCell>,
}

impl AblationResult {
    pub fn agreement(&self, space: Space, distance: Distance, observer: ObserverStrategy) -> Option<f64> {
        self.cells
            .iter()
            .find(|c| c.space == space && c.distance == distance && c.observer == observer)
            .map(|c| c.agreement)
    }
}

/// Agreement of each ablation cell with the analytic ground truth over
/// `n_mixtures × runs` samples. All cells see the same samples and seeds.
pub fn ablation(config: &BenchConfig) -> Result<AblationResult> {
    config.validate()?;
    let cells = ablation_cells();
    let jobs: Vec<(usize, usize)> = (0..config.n_mixtures)
        .flat_map(|m| (0..config.runs).map(move |r| (m, r)))
        .collect();
    let per_job = jobs
        .par_iter()
        .map(|&(m, run)| {
            let mixture = analytic_mixture(config.seed, m);
            let data_seed = seed::derive(config.seed, &[ABLATION_TAG, m as u64, run as u64, 0]);
            let test_seed = seed::derive(config.seed, &[ABLATION_TAG, m as u64, run as u64, 1]);
            let data = GeneratorSpec::new(mixture.generator.clone(), config.n_points, data_seed).generate()?;
            cells
                .iter()
                .map(|&(space, distance, observer)| {
                    let cfg = MudpodConfig {
                        space,
                        distance,
                        observer,
                        seed: test_seed,
                        ..config.mudpod.clone()
                    };
                    let result = mudpod_test(&data, &cfg)?;
                    Ok(AblationRun {
                        mixture: m,
                        separation: mixture.separation,
                        truth_multimodal: mixture.multimodal,
                        run,
                        data_seed,
                        test_seed,
                        space,
                        distance,
                        observer,
                        rejection_fraction: result.rejection_fraction,
                        verdict: result.verdict,
                        agrees: result.verdict.is_multimodal() == mixture.multimodal,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let runs: Vec<AblationRun> = per_job.into_iter().flatten().collect();
    let cells = cells
        .into_iter()
        .map(|(space, distance, observer)| {
            let cell: Vec<&AblationRun> = runs
                .iter()
                .filter(|r| r.space == space && r.distance == distance && r.observer == observer)
                .collect();
            let agree = cell.iter().filter(|r| r.agrees).count();
            AblationCell {
                space,
                distance,
                observer,
                trials: cell.len(),
                agreement: agree as f64 / cell.len() as f64,
            }
        })
        .collect();
    Ok(AblationResult { runs, cells })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRun {
    pub generator: String,
    pub n_views: usize,
    pub run: usize,
    pub data_seed: u64,
    pub cluster_seed: u64,
    pub k_true: usize,
    pub k_est: usize,
    pub relative_k_error: f64,
    pub nmi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub generator: String,
    pub n_views: usize,
    pub runs: usize,
    pub mean_relative_k_error: f64,
    /// Population variance over the runs.
    pub var_relative_k_error: f64,
    pub mean_nmi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub runs: Vec<SweepRun>,
    pub summary: Vec<SweepRow>,
}

impl SweepResult {
    pub fn mean_error(&self, generator: &str, n_views: usize) -> Option<f64> {
        self.summary
            .iter()
            .find(|r| r.generator == generator && r.n_views == n_views)
            .map(|r| r.mean_relative_k_error)
    }
}

/// mp-means relative-k error as a function of the number of views. The data
/// sample for a given (generator, run) is shared across view counts.
pub fn mcsweep(config: &BenchConfig) -> Result<SweepResult> {
    config.validate()?;
    let mut jobs = Vec::new();
    for (g, name) in config.sweep_generators.iter().enumerate() {
        for &m in &config.sweep_views {
            for run in 0..config.runs {
                jobs.push((g, name.as_str(), m, run));
            }
        }
    }
    let runs = jobs
        .par_iter()
        .map(|&(g, name, n_views, run)| {
            let generator = benchmark_generator(name).expect("validated");
            let data_seed = seed::derive(config.seed, &[SWEEP_TAG, g as u64, run as u64, 0]);
            let cluster_seed = seed::derive(config.seed, &[SWEEP_TAG, g as u64, run as u64, 1]);
            let data = GeneratorSpec::new(generator.clone(), config.n_points, data_seed).generate()?;
            let mp = MpMeansConfig {
                mudpod: MudpodConfig {
                    n_views,
                    ..config.mudpod.clone()
                },
                seed: cluster_seed,
                ..MpMeansConfig::default()
            };
            let state = mp_means(&data, &mp)?;
            let k_true = generator.n_components();
            Ok(SweepRun {
                generator: name.to_string(),
                n_views,
                run,
                data_seed,
                cluster_seed,
                k_true,
                k_est: state.k,
                relative_k_error: relative_k_error(state.k, k_true)?,
                nmi: nmi(data.labels().expect("generated data is labelled"), &state.labels)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut summary = Vec::new();
    for name in &config.sweep_generators {
        for &m in &config.sweep_views {
            let cell: Vec<&SweepRun> = runs.iter().filter(|r| &r.generator == name && r.n_views == m).collect();
            let len = cell.len() as f64;
            let mean = cell.iter().map(|r| r.relative_k_error).sum::<f64>() / len;
            let var = cell.iter().map(|r| (r.relative_k_error - mean).powi(2)).sum::<f64>() / len;
            summary.push(SweepRow {
                generator: name.clone(),
                n_views: m,
                runs: cell.len(),
                mean_relative_k_error: mean,
                var_relative_k_error: var,
                mean_nmi: cell.iter().map(|r| r.nmi).sum::<f64>() / len,
            });
        }
    }
    Ok(SweepResult { runs, summary })
}

/// Writes `records` as a headed CSV file.
pub fn write_records<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for r in records {
        w.serialize(r).map_err(|e| csv_error(path, e))?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(path: &Path, e: csv::Error) -> crate::Error {
    crate::Error::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Runs `suite` and writes `<suite>_runs.csv` and `<suite>_summary.csv` into
/// `out_dir`. Returns the written paths and the aggregate table as JSON.
pub fn run_suite(suite: Suite, config: &BenchConfig, out_dir: &Path) -> Result<(Vec<PathBuf>, serde_json::Value)> {
    std::fs::create_dir_all(out_dir)?;
    let runs_path = out_dir.join(format!("{suite}_runs.csv"));
    let summary_path = out_dir.join(format!("{suite}_summary.csv"));
    let summary = match suite {
        Suite::Table1 => {
            let r = table1(config)?;
            write_records(&runs_path, &r.runs)?;
            write_records(&summary_path, &r.summary)?;
            serde_json::to_value(&r.summary)?
        }
        Suite::Ablation => {
            let r = ablation(config)?;
            write_records(&runs_path, &r.runs)?;
            write_records(&summary_path, &r.cells)?;
            serde_json::to_value(&r.cells)?
        }
        Suite::Mcsweep => {
            let r = mcsweep(config)?;
            write_records(&runs_path, &r.runs)?;
            write_records(&summary_path, &r.summary)?;
            serde_json::to_value(&r.summary)?
        }
    };
    Ok((vec![runs_path, summary_path], summary))
}
