//! Experiment orchestration: presets, the training loop, convergence probes,
//! seed sweeps and the metrics documents they emit.

pub mod config;
pub mod probe;
pub mod runner;
pub mod sweep;

use serde::Serialize;

pub use config::{Algorithm, ExperimentConfig, Task, TraceLevel};
pub use runner::{run_experiment, Experiment, RunOutcome};
pub use sweep::{multi_seed, SweepReport};

use crate::metrics::TrialMetrics;

pub const METRICS_SCHEMA: &str = "threshold-rl-metrics";
pub const METRICS_VERSION: u32 = 1;

#[derive(Serialize)]
struct SummaryDocument<'a, T: Serialize> {
    schema: &'static str,
    version: u32,
    config: &'a ExperimentConfig,
    #[serde(flatten)]
    body: T,
}

#[derive(Serialize)]
struct RunBody<'a> {
    metrics: &'a TrialMetrics,
}

#[derive(Serialize)]
struct SweepBody<'a> {
    sweep: &'a SweepReport,
}

/// Versioned JSON summary of a single run. Wall-clock time is left out so the
/// same configuration and seed always produce the same bytes.
pub fn summary_json(cfg: &ExperimentConfig, metrics: &TrialMetrics) -> String {
    let doc = SummaryDocument {
        schema: METRICS_SCHEMA,
        version: METRICS_VERSION,
        config: cfg,
        body: RunBody { metrics },
    };
    serde_json::to_string_pretty(&doc).expect("metrics serialize")
}

pub fn sweep_json(cfg: &ExperimentConfig, report: &SweepReport) -> String {
    let doc = SummaryDocument {
        schema: METRICS_SCHEMA,
        version: METRICS_VERSION,
        config: cfg,
        body: SweepBody { sweep: report },
    };
    serde_json::to_string_pretty(&doc).expect("sweep serializes")
}
