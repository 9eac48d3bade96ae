//! Machine-readable run reports.
//!
//! Every command can emit one [`RunReport`] as JSON. The layout is described
//! by `docs/report.schema.json`; [`SCHEMA_VERSION`] changes whenever that file
//! does.

use serde::{Deserialize, Serialize};

use crate::mpmeans::{ClusterReport, StopReason};
use crate::mudpod::{Verdict, View};

pub const SCHEMA_VERSION: &str = "1.0.0";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: String,
    pub tool_version: String,
    /// Subcommand name.
    pub command: String,
    /// Full argument vector, program name excluded.
    pub argv: Vec<String>,
    /// Master seed after environment and flag resolution.
    pub seed: u64,
    pub wall_clock_seconds: f64,
    /// Effective configuration.
    pub config: serde_json::Value,
    /// Command-specific results, one of the `*Output` types.
    pub outputs: serde_json::Value,
}

impl RunReport {
    pub fn new<C: Serialize, O: Serialize>(
        command: &str,
        argv: Vec<String>,
        seed: u64,
        wall_clock_seconds: f64,
        config: &C,
        outputs: &O,
    ) -> crate::Result<Self> {
        Ok(Self {
            schema_version: SCHEMA_VERSION.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            argv,
            seed,
            wall_clock_seconds,
            config: serde_json::to_value(config)?,
            outputs: serde_json::to_value(outputs)?,
        })
    }

    pub fn to_json(&self) -> crate::Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DipOutput {
    pub n: usize,
    pub dip: f64,
    pub p_value: f64,
    pub modal_interval: [f64; 2],
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutput {
    pub n: usize,
    pub d: usize,
    pub rejection_fraction: f64,
    pub mean_dip: f64,
    pub verdict: Verdict,
    pub views: Vec<View>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterOutput {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub stop_reason: StopReason,
    pub cluster_sizes: Vec<usize>,
    pub clusters: Vec<ClusterReport>,
    /// Present when ground-truth labels were supplied.
    pub nmi: Option<f64>,
    pub k_true: Option<usize>,
    pub relative_k_error: Option<f64>,
    pub labels_path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthOutput {
    pub path: String,
    pub rows: usize,
    pub cols: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchOutput {
    pub suite: String,
    pub files: Vec<String>,
    pub summary: serde_json::Value,
}
