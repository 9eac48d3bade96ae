//! The `mudpod` command line.
//!
//! Exit codes: 0 for success or a unimodal verdict, 2 for a multimodal
//! verdict (`dip`, `test`), 1 for any usage or data error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bench::{run_suite, BenchConfig, Suite};
use crate::datagen::{benchmark_generator, benchmark_generators, identity, z_transform, Generator, GeneratorSpec};
use crate::dataset::Dataset;
use crate::dip::{cached_null, dip_statistic, SortedSample, DEFAULT_BOOTSTRAP};
use crate::error::{invalid, Result};
use crate::evaluation::{nmi, relative_k_error};
use crate::io::{read_csv, write_csv};
use crate::mpmeans::{mp_means, MpMeansConfig, SplitMode};
use crate::mudpod::{mudpod_test, Distance, MudpodConfig, ObserverStrategy, Space, Verdict, DEFAULT_NULL_SEED};
use crate::report::{BenchOutput, ClusterOutput, DipOutput, RunReport, SynthOutput, TestOutput};

/// Environment variable that supplies the default `--seed`.
pub const SEED_ENV: &str = "MUDPOD_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_MULTIMODAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "mudpod", version, about = "Multivariate unimodality testing and mp-means clustering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Univariate dip test on one CSV column.
    Dip(DipArgs),
    /// Multivariate unimodality test.
    Test(TestArgs),
    /// Estimate the number of clusters with mp-means.
    Cluster(ClusterArgs),
    /// Write a labelled synthetic sample.
    Synth(SynthArgs),
    /// Run a benchmark suite.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Numeric CSV file.
    input: PathBuf,
    /// The first row is a header.
    #[arg(long)]
    header: bool,
}

#[derive(Debug, Args)]
struct SeedArg {
    /// Master seed.
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct DipArgs {
    #[command(flatten)]
    input: InputArgs,
    /// 0-based column to test; required for multi-column input.
    #[arg(long)]
    column: Option<usize>,
    /// Bootstrap replicates for the p-value.
    #[arg(long, default_value_t = DEFAULT_BOOTSTRAP)]
    bootstrap: usize,
    /// Significance level.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[command(flatten)]
    seed: SeedArg,
    /// Print the JSON report instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Clone, Args)]
struct MudpodArgs {
    /// Unimodality index; distances are raised to this power.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Number of random views.
    #[arg(long, default_value_t = 100)]
    views: usize,
    /// Projection distortion.
    #[arg(long, default_value_t = 0.99)]
    epsilon: f64,
    /// Observer percentile of distance from the mean.
    #[arg(long, default_value_t = 0.99)]
    percentile: f64,
    /// Per-view significance level.
    #[arg(long, default_value_t = 0.01)]
    significance: f64,
    /// Multimodal iff the rejecting fraction of views exceeds this.
    #[arg(long, default_value_t = 0.01)]
    threshold: f64,
    /// Bootstrap replicates per dip p-value.
    #[arg(long, default_value_t = DEFAULT_BOOTSTRAP)]
    bootstrap: usize,
    /// Seed of the shared bootstrap null.
    #[arg(long, default_value_t = DEFAULT_NULL_SEED)]
    null_seed: u64,
    #[arg(long, value_enum, default_value_t = Space::Projected)]
    space: Space,
    #[arg(long, value_enum, default_value_t = Distance::Mahalanobis)]
    distance: Distance,
    #[arg(long, value_enum, default_value_t = ObserverStrategy::Percentile)]
    observer: ObserverStrategy,
}

impl MudpodArgs {
    fn config(&self, seed: u64) -> MudpodConfig {
        MudpodConfig {
            alpha: self.alpha,
            n_views: self.views,
            epsilon: self.epsilon,
            percentile: self.percentile,
            significance: self.significance,
            verdict_threshold: self.threshold,
            n_bootstrap: self.bootstrap,
            seed,
            null_seed: self.null_seed,
            space: self.space,
            distance: self.distance,
            observer: self.observer,
        }
    }
}

#[derive(Debug, Args)]
struct TestArgs {
    #[command(flatten)]
    input: InputArgs,
    /// 0-based label column to drop before testing.
    #[arg(long)]
    label_column: Option<usize>,
    #[command(flatten)]
    mudpod: MudpodArgs,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long)]
    json: bool,
    /// Print the per-view table.
    #[arg(long)]
    verbose: bool,
}

#[derive(Debug, Args)]
struct ClusterArgs {
    #[command(flatten)]
    input: InputArgs,
    /// 0-based column holding ground-truth labels; enables NMI.
    #[arg(long)]
    label_column: Option<usize>,
    #[arg(long, default_value_t = 300)]
    k_max: usize,
    /// Clusters smaller than this are not tested.
    #[arg(long, default_value_t = crate::mudpod::MIN_POINTS)]
    n_min: usize,
    /// Standardise every feature before clustering.
    #[arg(long)]
    z_transform: bool,
    #[arg(long, value_enum, default_value_t = SplitMode::MeanStd)]
    split: SplitMode,
    /// Write `row,cluster` assignments here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    mudpod: MudpodArgs,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    #[value(alias = "gaussian_mixture")]
    GaussianMixture,
    Circles,
    Moons,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Generator family; ignored with --preset.
    #[arg(long, value_enum, required_unless_present = "preset")]
    kind: Option<Kind>,
    /// One of the named benchmark generators.
    #[arg(long, conflicts_with = "kind")]
    preset: Option<String>,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Isotropic noise standard deviation (circles, moons).
    #[arg(long, default_value_t = 0.05)]
    noise: f64,
    /// Comma-separated circle radii.
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0])]
    radii: Vec<f64>,
    /// Comma-separated component weights; equal weights if omitted.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    /// Component means, `;`-separated, coordinates comma-separated: "1,4;2,1".
    #[arg(long)]
    means: Option<String>,
    /// Row-major covariances, `;`-separated per component; identity if omitted.
    #[arg(long)]
    covariances: Option<String>,
    #[command(flatten)]
    seed: SeedArg,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(value_enum)]
    suite: Suite,
    /// Runs per generator, mixture or view count.
    #[arg(long, default_value_t = 10)]
    runs: usize,
    /// Output directory for the CSV tables.
    #[arg(long, default_value = "bench-out")]
    out: PathBuf,
    #[arg(long, default_value_t = 1000)]
    n_points: usize,
    /// Mixtures in the ablation family.
    #[arg(long, default_value_t = 100)]
    mixtures: usize,
    /// View counts for mcsweep.
    #[arg(long, value_delimiter = ',', default_values_t = crate::bench::SWEEP_VIEWS)]
    sweep_views: Vec<usize>,
    /// Generators for mcsweep.
    #[arg(long, value_delimiter = ',', default_values_t = crate::bench::SWEEP_GENERATORS.map(String::from))]
    sweep_generators: Vec<String>,
    #[command(flatten)]
    mudpod: MudpodArgs,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long)]
    json: bool,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let argv = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let mut out = std::io::stdout().lock();
    match dispatch(cli.command, argv, &mut out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn dispatch(command: Command, argv: Vec<String>, out: &mut dyn Write) -> Result<i32> {
    let start = Instant::now();
    match command {
        Command::Dip(a) => cmd_dip(a, argv, start, out),
        Command::Test(a) => cmd_test(a, argv, start, out),
        Command::Cluster(a) => cmd_cluster(a, argv, start, out),
        Command::Synth(a) => cmd_synth(a, argv, start, out),
        Command::Bench(a) => cmd_bench(a, argv, start, out),
    }
}

fn emit_json<C: Serialize, O: Serialize>(
    out: &mut dyn Write,
    command: &str,
    argv: Vec<String>,
    seed: u64,
    start: Instant,
    config: &C,
    outputs: &O,
) -> Result<()> {
    let report = RunReport::new(command, argv, seed, start.elapsed().as_secs_f64(), config, outputs)?;
    writeln!(out, "{}", report.to_json()?)?;
    Ok(())
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Unimodal => EXIT_OK,
        Verdict::Multimodal => EXIT_MULTIMODAL,
    }
}

#[derive(Serialize)]
struct DipConfig {
    input: PathBuf,
    column: usize,
    n_bootstrap: usize,
    significance: f64,
    seed: u64,
}

fn cmd_dip(a: DipArgs, argv: Vec<String>, start: Instant, out: &mut dyn Write) -> Result<i32> {
    if a.bootstrap == 0 {
        return Err(invalid("bootstrap", "must be at least 1"));
    }
    if !(a.alpha > 0.0 && a.alpha < 1.0) {
        return Err(invalid("alpha", "must lie in (0, 1)"));
    }
    let data = read_csv(&a.input.input, a.input.header, None)?;
    let column = match a.column {
        Some(c) if c < data.cols() => c,
        Some(c) => return Err(invalid("column", format!("{c} is out of range for {} column(s)", data.cols()))),
        None if data.cols() == 1 => 0,
        None => {
            return Err(invalid(
                "column",
                format!("input has {} columns; choose one with --column", data.cols()),
            ))
        }
    };
    let values: Vec<f64> = data.iter_rows().map(|r| r[column]).collect();
    let sample = SortedSample::from_unsorted(values)?;
    let seed = a.seed.seed;
    let res = dip_statistic(&sample);
    let p_value = cached_null(sample.len(), a.bootstrap, seed).p_value(res.dip);
    let verdict = if p_value <= a.alpha {
        Verdict::Multimodal
    } else {
        Verdict::Unimodal
    };
    let output = DipOutput {
        n: sample.len(),
        dip: res.dip,
        p_value,
        modal_interval: [sample.values()[res.modal_interval.0], sample.values()[res.modal_interval.1]],
        verdict,
    };
    if a.json {
        let config = DipConfig {
            input: a.input.input.clone(),
            column,
            n_bootstrap: a.bootstrap,
            significance: a.alpha,
            seed,
        };
        emit_json(out, "dip", argv, seed, start, &config, &output)?;
    } else {
        writeln!(out, "n={} dip={:.6} p_value={:.4} verdict={}", output.n, output.dip, p_value, verdict)?;
    }
    Ok(verdict_code(verdict))
}

fn load(input: &InputArgs, label_column: Option<usize>) -> Result<Dataset> {
    read_csv(&input.input, input.header, label_column)
}

fn cmd_test(a: TestArgs, argv: Vec<String>, start: Instant, out: &mut dyn Write) -> Result<i32> {
    let data = load(&a.input, a.label_column)?;
    let seed = a.seed.seed;
    let config = a.mudpod.config(seed);
    let result = mudpod_test(&data, &config)?;
    let output = TestOutput {
        n: data.rows(),
        d: data.cols(),
        rejection_fraction: result.rejection_fraction,
        mean_dip: result.mean_dip(),
        verdict: result.verdict,
        views: result.views.clone(),
    };
    if a.json {
        emit_json(out, "test", argv, seed, start, &config, &output)?;
    } else {
        writeln!(
            out,
            "n={} d={} views={} rejection_fraction={:.4} verdict={}",
            output.n, output.d, config.n_views, output.rejection_fraction, output.verdict
        )?;
        if a.verbose {
            writeln!(out, "view\tdim\tobserver\tdip\tp_value")?;
            for v in &result.views {
                writeln!(
                    out,
                    "{}\t{}\t{}\t{:.6}\t{:.4}",
                    v.view_index, v.dim, v.observer_row, v.dip, v.dip_pvalue
                )?;
            }
        }
    }
    Ok(verdict_code(result.verdict))
}

fn write_assignments(path: &Path, labels: &[usize]) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "row,cluster")?;
    for (i, l) in labels.iter().enumerate() {
        writeln!(w, "{i},{l}")?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_cluster(a: ClusterArgs, argv: Vec<String>, start: Instant, out: &mut dyn Write) -> Result<i32> {
    let mut data = load(&a.input, a.label_column)?;
    let truth = data.take_labels();
    if a.z_transform {
        data = z_transform(&data)?;
    }
    let seed = a.seed.seed;
    let config = MpMeansConfig {
        mudpod: a.mudpod.config(seed),
        k_max: a.k_max,
        n_min: a.n_min,
        split: a.split,
        seed,
        ..MpMeansConfig::default()
    };
    let state = mp_means(&data, &config)?;
    if let Some(path) = &a.out {
        write_assignments(path, &state.labels)?;
    }
    let (score, k_true, rel) = match &truth {
        Some(t) => {
            let k_true = t.iter().collect::<std::collections::BTreeSet<_>>().len();
            (
                Some(nmi(t, &state.labels)?),
                Some(k_true),
                Some(relative_k_error(state.k, k_true)?),
            )
        }
        None => (None, None, None),
    };
    let output = ClusterOutput {
        n: data.rows(),
        d: data.cols(),
        k: state.k,
        stop_reason: state.stop_reason,
        cluster_sizes: state.cluster_sizes(),
        clusters: state.cluster_reports.clone(),
        nmi: score,
        k_true,
        relative_k_error: rel,
        labels_path: a.out.as_ref().map(|p| p.display().to_string()),
    };
    if a.json {
        emit_json(out, "cluster", argv, seed, start, &config, &output)?;
    } else {
        let stop = match state.stop_reason {
            crate::mpmeans::StopReason::AllUnimodal => "all_unimodal",
            crate::mpmeans::StopReason::KMax => "k_max",
        };
        writeln!(out, "k={} stop_reason={stop}", state.k)?;
        writeln!(out, "cluster\tsize\ttested\tverdict\tfraction\tmean_dip")?;
        for (c, r) in state.cluster_reports.iter().enumerate() {
            writeln!(
                out,
                "{c}\t{}\t{}\t{}\t{:.4}\t{:.6}",
                r.size, r.tested, r.verdict, r.rejection_fraction, r.mean_dip
            )?;
        }
        if let (Some(s), Some(kt), Some(e)) = (score, k_true, rel) {
            writeln!(out, "nmi={s:.4} k_true={kt} relative_k_error={e:.4}")?;
        }
    }
    Ok(EXIT_OK)
}

fn parse_vectors(name: &'static str, text: &str) -> Result<Vec<Vec<f64>>> {
    text.split(';')
        .map(|group| {
            group
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| invalid(name, format!("`{}` is not a number", v.trim())))
                })
                .collect()
        })
        .collect()
}

fn synth_generator(a: &SynthArgs) -> Result<Generator> {
    if let Some(name) = &a.preset {
        return benchmark_generator(name).ok_or_else(|| {
            let known: Vec<&str> = benchmark_generators().into_iter().map(|(n, _, _)| n).collect();
            invalid("preset", format!("unknown `{name}`; known: {}", known.join(", ")))
        });
    }
    Ok(match a.kind.expect("clap enforces kind or preset") {
        Kind::Circles => Generator::Circles {
            radii: a.radii.clone(),
            noise: a.noise,
        },
        Kind::Moons => Generator::Moons { noise: a.noise },
        Kind::GaussianMixture => {
            let means = parse_vectors(
                "means",
                a.means
                    .as_deref()
                    .ok_or_else(|| invalid("means", "required for gaussian-mixture"))?,
            )?;
            let k = means.len();
            let d = means[0].len();
            let weights = a.weights.clone().unwrap_or_else(|| vec![1.0 / k as f64; k]);
            let covariances = match &a.covariances {
                None => vec![identity(d); k],
                Some(text) => parse_vectors("covariances", text)?
                    .into_iter()
                    .map(|flat| {
                        if flat.len() != d * d {
                            return Err(invalid("covariances", format!("each needs {} entries", d * d)));
                        }
                        Ok(flat.chunks(d).map(<[f64]>::to_vec).collect())
                    })
                    .collect::<Result<Vec<_>>>()?,
            };
            Generator::GaussianMixture {
                weights,
                means,
                covariances,
            }
        }
    })
}

fn cmd_synth(a: SynthArgs, argv: Vec<String>, start: Instant, out: &mut dyn Write) -> Result<i32> {
    let seed = a.seed.seed;
    let spec = GeneratorSpec::new(synth_generator(&a)?, a.n, seed);
    let data = spec.generate()?;
    write_csv(&a.out, &data)?;
    let output = SynthOutput {
        path: a.out.display().to_string(),
        rows: data.rows(),
        cols: data.cols(),
    };
    if a.json {
        emit_json(out, "synth", argv, seed, start, &spec, &output)?;
    } else {
        writeln!(out, "wrote {} rows x {} features to {}", output.rows, output.cols, output.path)?;
    }
    Ok(EXIT_OK)
}

fn cmd_bench(a: BenchArgs, argv: Vec<String>, start: Instant, out: &mut dyn Write) -> Result<i32> {
    let seed = a.seed.seed;
    let config = BenchConfig {
        runs: a.runs,
        seed,
        n_points: a.n_points,
        n_mixtures: a.mixtures,
        mudpod: a.mudpod.config(seed),
        sweep_views: a.sweep_views,
        sweep_generators: a.sweep_generators,
    };
    let (files, summary) = run_suite(a.suite, &config, &a.out)?;
    let output = BenchOutput {
        suite: a.suite.to_string(),
        files: files.iter().map(|p| p.display().to_string()).collect(),
        summary,
    };
    if a.json {
        emit_json(out, "bench", argv, seed, start, &config, &output)?;
    } else {
        for f in &output.files {
            writeln!(out, "wrote {f}")?;
        }
        if let serde_json::Value::Array(rows) = &output.summary {
            for row in rows {
                writeln!(out, "{row}")?;
            }
        }
    }
    Ok(EXIT_OK)
}
