use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::runner::run_experiment;
use crate::error::{Error, Result};
use crate::metrics::TrialMetrics;

/// Aggregate over seeds `seed, seed + 1, ..., seed + n - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub base_seed: u64,
    pub n_seeds: usize,
    pub converged: usize,
    pub success_rate: f64,
    /// Median presentations to convergence, counting failed runs as slower
    /// than any converged run. `None` when the median falls on a failed run.
    pub median_presentations: Option<f64>,
    pub min_presentations: Option<u64>,
    pub max_presentations: Option<u64>,
    pub runs: Vec<TrialMetrics>,
}

/// Median with `None` ordered above every value.
pub fn median_with_failures(values: &[Option<u64>]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted: Vec<u64> = values.iter().map(|v| v.unwrap_or(u64::MAX)).collect();
    sorted.sort_unstable();
    let n = sorted.len();
    let (lo, hi) = (sorted[(n - 1) / 2], sorted[n / 2]);
    if hi == u64::MAX {
        None
    } else {
        Some((lo as f64 + hi as f64) / 2.0)
    }
}

impl SweepReport {
    pub fn from_runs(base_seed: u64, runs: Vec<TrialMetrics>) -> Self {
        let counts: Vec<Option<u64>> = runs.iter().map(|m| m.presentations_to_convergence).collect();
        let done: Vec<u64> = counts.iter().flatten().copied().collect();
        SweepReport {
            base_seed,
            n_seeds: runs.len(),
            converged: done.len(),
            success_rate: done.len() as f64 / runs.len().max(1) as f64,
            median_presentations: median_with_failures(&counts),
            min_presentations: done.iter().min().copied(),
            max_presentations: done.iter().max().copied(),
            runs,
        }
    }
}

/// Independent runs in parallel; the report is ordered by seed and does not
/// depend on scheduling.
pub fn multi_seed(cfg: &ExperimentConfig, n_seeds: usize) -> Result<SweepReport> {
    if n_seeds == 0 {
        return Err(Error::Config("a sweep needs at least one seed".into()));
    }
    cfg.validate()?;
    let runs = (0..n_seeds as u64)
        .into_par_iter()
        .map(|i| run_experiment(&cfg.clone().with_seed(cfg.seed + i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport::from_runs(cfg.seed, runs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_handles_failures() {
        assert_eq!(median_with_failures(&[Some(3), Some(1), Some(2)]), Some(2.0));
        assert_eq!(median_with_failures(&[Some(4), Some(2)]), Some(3.0));
        assert_eq!(median_with_failures(&[Some(4), None, Some(2)]), Some(4.0));
        assert_eq!(median_with_failures(&[None, None, Some(2)]), None);
        assert_eq!(median_with_failures(&[]), None);
    }
}
