//! Property checks shared by the `properties` suite and the acceptance
//! harness. Each returns `Err` with the shrunk counterexample on failure.

use mudpod::datagen::{benchmark_generator, z_transform, GeneratorSpec};
use mudpod::dip::{dip_statistic, SortedSample};
use mudpod::evaluation::nmi;
use mudpod::io::{read_csv, write_csv};
use mudpod::mahalanobis::{covariance, mahalanobis_distances, whitening_factor, whitening_residual};
use mudpod::mpmeans::{mp_means, MpMeansConfig, StopReason};
use mudpod::mudpod::{mudpod_test, MudpodConfig, Verdict};
use mudpod::projection::{jl_dimension, project, ProjectionMatrix, ProjectionSpec};
use mudpod::Dataset;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type Check = Result<(), String>;

fn run<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Check
where
    S::Value: std::fmt::Debug,
{
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(config.clone(), TestRng::deterministic_rng(config.rng_algorithm));
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn gaussian_rows(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
        .collect()
}

/// Samples with ties, mixed scales and clumps.
fn univariate(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(
        prop_oneof![
            -1e3..1e3f64,
            (0..6i32).prop_map(f64::from),
            (-1.0..1.0f64).prop_map(|v| 50.0 + v * 1e-3),
        ],
        4..max_len,
    )
}

pub fn dip_bounds() -> Check {
    run(512, univariate(300), |xs| {
        let s = SortedSample::from_unsorted(xs).unwrap();
        let n = s.len() as f64;
        let r = dip_statistic(&s);
        prop_assert!(r.dip >= 1.0 / (2.0 * n) - 1e-15, "dip {} below 1/(2n)", r.dip);
        prop_assert!(r.dip <= 0.25 + 1e-15, "dip {} above 1/4", r.dip);
        let (lo, hi) = r.modal_interval;
        prop_assert!(lo <= hi && hi < s.len());
        Ok(())
    })
}

pub fn dip_affine_invariance() -> Check {
    let strategy = (univariate(200), -8i32..8, -1e3..1e3f64, 1e-3..1e3f64);
    run(256, strategy, |(xs, k, b, a)| {
        let base = dip_statistic(&SortedSample::from_unsorted(xs.clone()).unwrap()).dip;
        // Power-of-two scaling is exact in floating point, so the dip must be too.
        let scale = 2f64.powi(k);
        let scaled: Vec<f64> = xs.iter().map(|v| v * scale).collect();
        let exact = dip_statistic(&SortedSample::from_unsorted(scaled).unwrap()).dip;
        prop_assert_eq!(base, exact);
        let moved: Vec<f64> = xs.iter().map(|v| a * v + b).collect();
        let general = dip_statistic(&SortedSample::from_unsorted(moved).unwrap()).dip;
        prop_assert!((base - general).abs() < 1e-9, "{} vs {}", base, general);
        Ok(())
    })
}

pub fn mahalanobis_affine_invariance() -> Check {
    run(48, (any::<u64>(), 0usize..200), |(seed, observer)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = gaussian_rows(&mut rng, 200, 3);
        let a = loop {
            let m = nalgebra::Matrix3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
            let sv = m.singular_values();
            if sv.min() > 0.05 * sv.max() {
                break m;
            }
        };
        let b = nalgebra::Vector3::from_fn(|_, _| rng.random_range(-10.0..10.0));
        let moved: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| {
                let v = a * nalgebra::Vector3::new(r[0], r[1], r[2]) + b;
                vec![v.x, v.y, v.z]
            })
            .collect();
        let distances = |rows: &[Vec<f64>]| {
            let ds = Dataset::from_rows(rows).unwrap();
            let w = whitening_factor(&covariance(&ds).unwrap()).unwrap();
            assert_eq!(w.ridge(), 0.0);
            let mut d = mahalanobis_distances(&ds, ds.row(observer), &w, Some(observer)).unwrap();
            d.sort_by(f64::total_cmp);
            d
        };
        let (before, after) = (distances(&rows), distances(&moved));
        prop_assert_eq!(before.len(), 199);
        for (x, y) in before.iter().zip(&after) {
            prop_assert!((x - y).abs() <= 1e-6 * x.abs().max(1e-12), "{} vs {}", x, y);
        }
        Ok(())
    })
}

pub fn whitening_residual_small() -> Check {
    let strategy = (any::<u64>(), 2usize..40, 1usize..21, -6i32..7);
    run(256, strategy, |(seed, n, d, exp)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = 10f64.powi(exp);
        let rows: Vec<Vec<f64>> = gaussian_rows(&mut rng, n, d)
            .into_iter()
            .map(|r| r.into_iter().map(|v| v * scale).collect())
            .collect();
        let sigma = covariance(&Dataset::from_rows(&rows).unwrap()).unwrap();
        let w = whitening_factor(&sigma).unwrap();
        let res = whitening_residual(&sigma, &w);
        prop_assert!(res < 1e-6, "residual {} (n={}, d={}, ridge={})", res, n, d, w.ridge());
        if n <= d {
            prop_assert!(w.ridge() > 0.0, "rank-deficient input must be regularised");
        }
        Ok(())
    })
}

pub fn covariance_matches_two_pass() -> Check {
    run(128, (any::<u64>(), 2usize..60, 1usize..8), |(seed, n, d)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift = rng.random_range(-100.0..100.0);
        let rows: Vec<Vec<f64>> = gaussian_rows(&mut rng, n, d)
            .into_iter()
            .map(|r| r.into_iter().map(|v| v + shift).collect())
            .collect();
        let ours = covariance(&Dataset::from_rows(&rows).unwrap()).unwrap();
        let oracle = super::covariance_two_pass(&rows);
        let scale = oracle.iter().flatten().fold(1e-300f64, |m, v| m.max(v.abs()));
        for a in 0..d {
            for b in 0..d {
                prop_assert!((ours[(a, b)] - oracle[a][b]).abs() <= 1e-12 * scale);
            }
        }
        Ok(())
    })
}

/// Empirical entry variance of a `1000 × 57` projection is `1/1000` within
/// ±20%, across twenty seeds.
pub fn jl_variance_moment() -> Check {
    for seed in 0..20 {
        let spec = ProjectionSpec {
            source_dim: 1000,
            target_dim: 57,
            epsilon: 0.99,
            seed,
        };
        let m = spec.sample().map_err(|e| e.to_string())?;
        let e = m.entries();
        let mean = e.iter().sum::<f64>() / e.len() as f64;
        let var = e.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (e.len() - 1) as f64;
        if (var * 1000.0 - 1.0).abs() > 0.2 {
            return Err(format!("seed {seed}: entry variance {var}"));
        }
    }
    Ok(())
}

/// 500 points in 100 dimensions at ε = 0.5: fewer than half of all pairs
/// leave the `[1-ε, 1+ε]` squared-distance band, for each of 20 draws.
pub fn jl_distortion() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let rows = gaussian_rows(&mut rng, 500, 100);
    let data = Dataset::from_rows(&rows).unwrap();
    let q = jl_dimension(500, 0.5, 100).map_err(|e| e.to_string())?;
    for draw in 0..20 {
        let spec = ProjectionSpec {
            source_dim: 100,
            target_dim: q,
            epsilon: 0.5,
            seed: 1000 + draw,
        };
        let p = project(&data, &spec.sample().unwrap()).unwrap();
        let mut outside = 0usize;
        let mut pairs = 0usize;
        for i in 0..500 {
            for j in i + 1..500 {
                let d2 = |ds: &Dataset| -> f64 {
                    ds.row(i).iter().zip(ds.row(j)).map(|(a, b)| (a - b) * (a - b)).sum()
                };
                let ratio = d2(&p) / d2(&data);
                if !(0.5..=1.5).contains(&ratio) {
                    outside += 1;
                }
                pairs += 1;
            }
        }
        if outside * 2 >= pairs {
            return Err(format!("draw {draw}: {outside}/{pairs} pairs distorted"));
        }
    }
    Ok(())
}

pub fn projection_linearity() -> Check {
    run(64, (any::<u64>(), 1usize..30, -5.0..5.0f64, -5.0..5.0f64), |(seed, d, alpha, beta)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = rng.random_range(1..=d);
        let entries: Vec<f64> = (0..d * q).map(|_| rng.sample(StandardNormal)).collect();
        let pi = ProjectionMatrix::from_row_major(d, q, entries).unwrap();
        let xy = gaussian_rows(&mut rng, 2, d);
        let combo: Vec<f64> = xy[0].iter().zip(&xy[1]).map(|(x, y)| alpha * x + beta * y).collect();
        let px = project(&Dataset::from_rows(&xy).unwrap(), &pi).unwrap();
        let pc = project(&Dataset::from_rows(&[combo]).unwrap(), &pi).unwrap();
        for j in 0..q {
            let expected = alpha * px.row(0)[j] + beta * px.row(1)[j];
            prop_assert!((pc.row(0)[j] - expected).abs() <= 1e-10 * (1.0 + expected.abs()));
        }
        Ok(())
    })
}

fn small_test_config(seed: u64) -> MudpodConfig {
    MudpodConfig {
        n_views: 20,
        n_bootstrap: 200,
        seed,
        ..MudpodConfig::default()
    }
}

/// The rejecting fraction is nondecreasing in the significance level, the
/// view c.d.f. is a valid step function, and it agrees with the fraction.
pub fn view_cdf_monotone() -> Check {
    run(24, (any::<u64>(), 8usize..120, 1usize..4), |(seed, n, d)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = gaussian_rows(&mut rng, n, d);
        let data = Dataset::from_rows(&rows).unwrap();
        let result = mudpod_test(&data, &small_test_config(seed)).unwrap();
        let cdf = result.cdf();
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        for w in grid.windows(2) {
            prop_assert!(result.fraction_at(w[0]) <= result.fraction_at(w[1]));
            prop_assert!(cdf.eval(w[0]) <= cdf.eval(w[1]));
        }
        prop_assert_eq!(cdf.eval(1.0), 1.0);
        prop_assert!(grid.iter().all(|&t| (0.0..=1.0).contains(&cdf.eval(t))));
        prop_assert_eq!(cdf.eval(result.config_echo.significance), result.rejection_fraction);
        Ok(())
    })
}

/// Two independent runs of `M = 200` views on the same unimodal data stay
/// within twice the two-sided DKW radius at 99% confidence, in every one of
/// 20 trials.
pub fn dkw_two_run() -> Check {
    let m = 200usize;
    let bound = 2.0 * ((2.0f64 / 0.01).ln() / (2.0 * m as f64)).sqrt();
    let generator = benchmark_generator("single_2d_gaussian").unwrap();
    for trial in 0..20u64 {
        let data = GeneratorSpec::new(generator.clone(), 300, 500 + trial).generate().unwrap();
        let cfg = |seed| MudpodConfig {
            n_views: m,
            seed,
            ..MudpodConfig::default()
        };
        let a = mudpod_test(&data, &cfg(2 * trial)).unwrap().cdf();
        let b = mudpod_test(&data, &cfg(2 * trial + 1)).unwrap().cdf();
        let gap = a.sup_distance(&b);
        if gap > bound {
            return Err(format!("trial {trial}: sup gap {gap} exceeds {bound}"));
        }
    }
    Ok(())
}

/// Clumpy data with a random number of blobs.
fn blobs() -> impl Strategy<Value = (u64, usize, usize, usize)> {
    (any::<u64>(), 1usize..5, 1usize..4, 8usize..90)
}

pub fn mp_means_invariants() -> Check {
    run(32, (blobs(), 1usize..7), |((seed, blobs, d, n), k_max)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let centers = gaussian_rows(&mut rng, blobs, d);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let c = &centers[i % blobs];
                c.iter().map(|v| 8.0 * v + rng.sample::<f64, _>(StandardNormal)).collect()
            })
            .collect();
        let data = Dataset::from_rows(&rows).unwrap();
        let config = MpMeansConfig {
            mudpod: small_test_config(seed),
            k_max,
            seed,
            ..MpMeansConfig::default()
        };
        let state = mp_means(&data, &config).unwrap();
        prop_assert!(state.k >= 1 && state.k <= k_max);
        prop_assert_eq!(state.labels.len(), n);
        prop_assert!(state.labels.iter().all(|&l| l < state.k));
        prop_assert_eq!(state.centers.len(), state.k);
        prop_assert_eq!(state.cluster_reports.len(), state.k);
        let sizes = state.cluster_sizes();
        prop_assert_eq!(sizes.iter().sum::<usize>(), n);
        prop_assert!(sizes.iter().all(|&s| s > 0), "empty cluster in {:?}", sizes);
        // One split per round, rounds in order: k never decreases.
        prop_assert_eq!(state.splits.len(), state.k - 1);
        prop_assert!(state.splits.windows(2).all(|w| w[0].round < w[1].round));
        match state.stop_reason {
            StopReason::AllUnimodal => {
                for r in &state.cluster_reports {
                    prop_assert_eq!(r.verdict, Verdict::Unimodal);
                    prop_assert_eq!(r.tested, r.size >= config.n_min);
                }
            }
            StopReason::KMax => prop_assert_eq!(state.k, k_max),
        }
        prop_assert_eq!(&mp_means(&data, &config).unwrap(), &state);
        Ok(())
    })
}

fn labelings() -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
    (1usize..120).prop_flat_map(|n| {
        (
            prop::collection::vec(0usize..6, n),
            prop::collection::vec(0usize..6, n),
        )
    })
}

pub fn nmi_symmetry_and_permutation() -> Check {
    run(512, (labelings(), any::<u64>()), |((t, p), seed)| {
        let forward = nmi(&t, &p).unwrap();
        prop_assert!((0.0..=1.0).contains(&forward));
        prop_assert!((forward - nmi(&p, &t).unwrap()).abs() < 1e-12);
        let oracle = super::nmi_by_table(&t, &p);
        prop_assert!((forward - oracle.clamp(0.0, 1.0)).abs() < 1e-12, "{} vs {}", forward, oracle);
        // Relabel both sides through random bijections (into sparse ids).
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut perm: Vec<usize> = (0..6).map(|i| 100 + 7 * i).collect();
        for i in (1..perm.len()).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let t2: Vec<usize> = t.iter().map(|&l| perm[l]).collect();
        let p2: Vec<usize> = p.iter().map(|&l| perm[5 - l]).collect();
        prop_assert!((forward - nmi(&t2, &p2).unwrap()).abs() < 1e-12);
        Ok(())
    })
}

pub fn z_transform_properties() -> Check {
    run(128, (any::<u64>(), 2usize..80, 1usize..6), |(seed, n, d)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = gaussian_rows(&mut rng, n, d);
        // Constant column, and wild scales elsewhere.
        for r in &mut rows {
            r[0] = 5.0;
            for (j, v) in r.iter_mut().enumerate().skip(1) {
                *v = *v * 10f64.powi(j as i32 * 2 - 3) + 40.0;
            }
        }
        let z = z_transform(&Dataset::from_rows(&rows).unwrap()).unwrap();
        for j in 0..d {
            let col: Vec<f64> = z.iter_rows().map(|r| r[j]).collect();
            let mean = col.iter().sum::<f64>() / n as f64;
            let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
            prop_assert!(mean.abs() < 1e-12, "column {} mean {}", j, mean);
            prop_assert!(sd == 0.0 || (sd - 1.0).abs() < 1e-12, "column {} sd {}", j, sd);
        }
        let twice = z_transform(&z).unwrap();
        for (a, b) in z.as_slice().iter().zip(twice.as_slice()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        Ok(())
    })
}

fn finite_f64() -> impl Strategy<Value = f64> {
    prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO
}

pub fn csv_round_trip() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let strategy = (1usize..5)
        .prop_flat_map(|d| (Just(d), prop::collection::vec(prop::collection::vec(finite_f64(), d), 1..30)))
        .prop_flat_map(|(d, rows)| {
            let n = rows.len();
            (Just(d), Just(rows), prop::option::of(prop::collection::vec(0usize..1000, n)))
        });
    run(128, strategy, |(_, rows, labels)| {
        let mut ds = Dataset::from_rows(&rows).unwrap();
        if let Some(l) = labels {
            ds = ds.with_labels(l).unwrap();
        }
        let path = dir.path().join("round.csv");
        write_csv(&path, &ds).unwrap();
        let label_column = ds.labels().map(|_| ds.cols());
        let back = read_csv(&path, true, label_column).unwrap();
        prop_assert_eq!(back, ds);
        Ok(())
    })
}

/// Every check, by name.
pub fn all() -> Vec<(&'static str, fn() -> Check)> {
    vec![
        ("dip bounds", dip_bounds),
        ("dip affine invariance", dip_affine_invariance),
        ("mahalanobis affine invariance", mahalanobis_affine_invariance),
        ("whitening residual", whitening_residual_small),
        ("covariance vs two-pass", covariance_matches_two_pass),
        ("projection variance moment", jl_variance_moment),
        ("projection distortion", jl_distortion),
        ("projection linearity", projection_linearity),
        ("view cdf monotonicity", view_cdf_monotone),
        ("two-run DKW bound", dkw_two_run),
        ("mp-means invariants", mp_means_invariants),
        ("nmi symmetry and permutation", nmi_symmetry_and_permutation),
        ("z-transform idempotence", z_transform_properties),
        ("csv round trip", csv_round_trip),
    ]
}
