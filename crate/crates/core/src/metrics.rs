use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::env::Action;

/// Greedy, learning-free walk from one start cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rollout {
    /// Cells visited, starting cell first.
    pub path: Vec<usize>,
    pub actions: Vec<Action>,
    /// Reward-node activation at each visited cell before the goal (empty without a reward node).
    pub reward_node: Vec<f64>,
    pub reached_goal: bool,
    /// Every motor activation along the walk was mature.
    pub mature: bool,
}

impl Rollout {
    /// Reached the goal with a mature response at every state.
    pub fn learnt(&self) -> bool {
        self.reached_goal && self.mature
    }
}

/// Network readout over the grid at one moment.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GridReadout {
    pub presentation: u64,
    /// Output activations for every cell.
    pub outputs: BTreeMap<usize, Vec<f64>>,
    pub policy: BTreeMap<usize, Action>,
    pub rollouts: BTreeMap<usize, Rollout>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CellMetrics {
    /// First probe at which the greedy rollout from this cell was learnt.
    pub learnt_at: Option<u64>,
    /// First presentation at which this cell's reward-node activation exceeded
    /// the conditioned-reward threshold.
    pub breadcrumb_at: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtinctionReport {
    pub presentations: u64,
    /// Fraction of required start cells whose greedy rollout still reaches the goal.
    pub success_rate: f64,
    /// (cell, motor node) pairs on the converged paths that were mature at convergence.
    pub previously_mature: usize,
    /// How many of those are still mature.
    pub still_mature: usize,
}

impl ExtinctionReport {
    pub fn all_immature(&self) -> bool {
        self.still_mature == 0
    }
}

/// Outcome of one training run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub seed: u64,
    pub presentations: u64,
    pub presentations_to_convergence: Option<u64>,
    pub converged: bool,
    pub reward_events: u64,
    pub primary_rewards: u64,
    pub conditioned_rewards: u64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub cells: BTreeMap<usize, CellMetrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at_convergence: Option<GridReadout>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_readout: Option<GridReadout>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extinction: Option<ExtinctionReport>,
    /// Excluded from the summary document so identical runs serialize identically.
    #[serde(skip)]
    pub wall_clock: Duration,
}

impl TrialMetrics {
    pub fn cell_learnt(&self, cell: usize) -> bool {
        self.cells.get(&cell).is_some_and(|c| c.learnt_at.is_some())
    }

    pub fn final_policy(&self) -> Option<&BTreeMap<usize, Action>> {
        self.final_readout.as_ref().map(|r| &r.policy)
    }
}
