use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::env::grid::{CELLS, EDGE_CELLS};
use crate::env::GridConfig;
use crate::error::{Error, Result};
use crate::network::DEFAULT_INIT_HALF_WIDTH;
use crate::params::{LearningParams, PunishRange};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Tracking,
    Maze,
    Xor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Supervised,
    Tap,
    Tar,
    Tac,
}

macro_rules! text_enum {
    ($ty:ident { $($variant:ident => $name:literal),* $(,)? }) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($ty::$variant => $name),* })
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok($ty::$variant),)*
                    other => Err(Error::Config(format!(
                        concat!("unknown ", stringify!($ty), " `{}`"), other
                    ))),
                }
            }
        }
    };
}

text_enum!(Task { Tracking => "tracking", Maze => "maze", Xor => "xor" });
text_enum!(Algorithm { Supervised => "supervised", Tap => "tap", Tar => "tar", Tac => "tac" });

/// How much per-step detail the trace stream carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceLevel {
    #[default]
    Off,
    Rewards,
    Steps,
}

text_enum!(TraceLevel { Off => "off", Rewards => "rewards", Steps => "steps" });

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub task: Task,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub max_presentations: u64,
    pub params: LearningParams,
    pub layer_sizes: Vec<usize>,
    pub init_half_width: f64,
    /// Grid physics; ignored for XOR.
    pub grid: Option<GridConfig>,
    /// Cell the target occupies before the first presentation.
    pub start_cell: Option<usize>,
    /// Start cells whose greedy rollout must be learnt for convergence.
    pub required_cells: Vec<usize>,
    /// Presentations between convergence probes on grid tasks.
    pub probe_interval: u64,
    /// Keep training until the cap even after convergence.
    pub continue_after_convergence: bool,
    /// After convergence, train this many more presentations with the primary reward removed.
    pub extinction_presentations: Option<u64>,
    pub trace: TraceLevel,
}

pub const REWARD_NODE: usize = 4;
pub const GRID_HIDDEN: usize = 12;
pub const XOR_HIDDEN: usize = 3;

impl ExperimentConfig {
    /// Named presets for the five reference experiments and their variants.
    pub fn preset(task: Task, algorithm: Algorithm) -> Result<Self> {
        let (grid, required, start, layers): (Option<GridConfig>, Vec<usize>, Option<usize>, Vec<usize>) =
            match task {
                Task::Xor => (None, Vec::new(), None, vec![2, XOR_HIDDEN, 1]),
                Task::Tracking => {
                    let required = if algorithm == Algorithm::Tap {
                        EDGE_CELLS.to_vec()
                    } else {
                        (0..CELLS).filter(|&c| c != 4).collect()
                    };
                    (Some(GridConfig::tracking()), required, Some(0), grid_layers(algorithm))
                }
                Task::Maze => (Some(GridConfig::maze()), vec![3], Some(3), grid_layers(algorithm)),
            };
        let max_presentations = match (task, algorithm) {
            (Task::Xor, Algorithm::Supervised) => 50_000,
            (Task::Xor, Algorithm::Tap) => 200_000,
            (Task::Xor, _) => 50_000,
            (Task::Tracking, Algorithm::Tap) => 1_200_000,
            (Task::Tracking, _) => 1_100_000,
            (Task::Maze, Algorithm::Tac) => 200_000,
            (Task::Maze, _) => 800_000,
        };
        // The narrow punishment band traps the local rule on XOR in a constant
        // output that is right half the time; the full band escapes it.
        let params = match (task, algorithm) {
            (Task::Xor, Algorithm::Tac) => LearningParams::default().with_punish_range(PunishRange::Full),
            _ => LearningParams::default(),
        };
        let cfg = ExperimentConfig {
            task,
            algorithm,
            seed: 0,
            max_presentations,
            params,
            layer_sizes: layers,
            init_half_width: DEFAULT_INIT_HALF_WIDTH,
            grid,
            start_cell: start,
            required_cells: required,
            probe_interval: if task == Task::Xor { 1 } else { 10 },
            continue_after_convergence: task == Task::Tracking && algorithm == Algorithm::Tap,
            extinction_presentations: None,
            trace: TraceLevel::Off,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn uses_reward_node(&self) -> bool {
        self.task != Task::Xor && matches!(self.algorithm, Algorithm::Tar | Algorithm::Tac)
    }

    /// Compatibility checks run before any stepping.
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let fail = |msg: String| Err(Error::Config(msg));
        match (self.task, self.algorithm) {
            (Task::Tracking | Task::Maze, Algorithm::Supervised) => {
                return fail(format!("supervised training needs a labeled dataset; {} has none", self.task))
            }
            (Task::Xor, Algorithm::Tar) => {
                return fail("conditioned reinforcement needs a multi-step task; use tap or tac for xor".into())
            }
            _ => {}
        }
        if self.layer_sizes.len() < 2 {
            return fail(format!("need at least 2 layers, got {:?}", self.layer_sizes));
        }
        let input = self.layer_sizes[0];
        let output = *self.layer_sizes.last().unwrap();
        let (want_in, want_out) = match self.task {
            Task::Xor => (2, 1),
            _ if self.uses_reward_node() => (CELLS, REWARD_NODE + 1),
            _ => (CELLS, 4),
        };
        if input != want_in || output != want_out {
            return fail(format!(
                "{} with {} needs {want_in} inputs and {want_out} outputs, got {:?}",
                self.task, self.algorithm, self.layer_sizes
            ));
        }
        if self.max_presentations == 0 {
            return fail("max_presentations must be positive".into());
        }
        if self.probe_interval == 0 {
            return fail("probe_interval must be positive".into());
        }
        if self.uses_reward_node() && self.params.gamma >= 1.0 {
            return fail(format!("gamma must be below 1 with a reward node, got {}", self.params.gamma));
        }
        if self.task != Task::Xor {
            let grid = self.grid.as_ref().ok_or_else(|| Error::Config("grid task without grid config".into()))?;
            if self.required_cells.is_empty() {
                return fail("grid tasks need at least one required start cell".into());
            }
            for &c in self.required_cells.iter().chain(self.start_cell.iter()) {
                if c >= CELLS {
                    return fail(format!("cell {c} is off the grid"));
                }
            }
            if self.required_cells.contains(&grid.goal) {
                return fail(format!("required cell {} is the goal", grid.goal));
            }
        }
        Ok(())
    }
}

fn grid_layers(algorithm: Algorithm) -> Vec<usize> {
    match algorithm {
        Algorithm::Tar | Algorithm::Tac => vec![CELLS, GRID_HIDDEN, REWARD_NODE + 1],
        _ => vec![CELLS, GRID_HIDDEN, 4],
    }
}
