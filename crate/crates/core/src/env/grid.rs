//! 3×3 grid worlds: target tracking and the barrier maze.
//!
//! Cells are numbered row-major from the top-left corner:
//!
//! ```text
//! 0 1 2
//! 3 4 5
//! 6 7 8
//! ```

use std::collections::{BTreeSet, VecDeque};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{decode_action, Action, Environment, Transition};
use crate::error::{Error, Result};
use crate::reward::RewardSource;

pub const SIDE: usize = 3;
pub const CELLS: usize = SIDE * SIDE;
/// Longest shortest path between two cells of an unobstructed grid.
pub const DIAMETER: usize = 2 * (SIDE - 1);

pub const CORNER_CELLS: [usize; 4] = [0, 2, 6, 8];
pub const EDGE_CELLS: [usize; 4] = [1, 3, 5, 7];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridState {
    pub target_cell: usize,
    pub step: u64,
}

impl GridState {
    pub fn new(target_cell: usize) -> Self {
        GridState {
            target_cell,
            step: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RespawnRule {
    Fixed(usize),
    Uniform(Vec<usize>),
}

impl RespawnRule {
    pub fn support(&self) -> Vec<usize> {
        match self {
            RespawnRule::Fixed(c) => vec![*c],
            RespawnRule::Uniform(cells) => cells.clone(),
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> usize {
        match self {
            RespawnRule::Fixed(c) => *c,
            RespawnRule::Uniform(cells) => cells[rng.gen_range(0..cells.len())],
        }
    }
}

/// Declarative description of a grid world.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridConfig {
    pub goal: usize,
    /// Unordered cell pairs whose shared wall cannot be crossed.
    #[serde(default)]
    pub blocked: Vec<[usize; 2]>,
    pub spawn: RespawnRule,
}

impl GridConfig {
    /// Move the target to the centre; respawn anywhere but the centre.
    pub fn tracking() -> Self {
        GridConfig {
            goal: 4,
            blocked: Vec::new(),
            spawn: RespawnRule::Uniform(vec![0, 1, 2, 3, 5, 6, 7, 8]),
        }
    }

    /// Reach the top-centre cell from cell 3 around an invisible barrier.
    /// With 3|0 and 4|1 walled off the only short route is 3→4→5→2→1.
    pub fn maze() -> Self {
        GridConfig {
            goal: 1,
            blocked: vec![[3, 0], [4, 1]],
            spawn: RespawnRule::Fixed(3),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridPhysics {
    goal: usize,
    /// Stored in both directions.
    blocked: BTreeSet<(usize, usize)>,
    respawn: RespawnRule,
}

fn check_cell(cell: usize, what: &str) -> Result<()> {
    if cell >= CELLS {
        return Err(Error::Config(format!("{what} {cell} is off the {SIDE}x{SIDE} grid")));
    }
    Ok(())
}

fn adjacent(a: usize, b: usize) -> bool {
    let (ra, ca) = (a / SIDE, a % SIDE);
    let (rb, cb) = (b / SIDE, b % SIDE);
    ra.abs_diff(rb) + ca.abs_diff(cb) == 1
}

/// Destination of `action` from `cell` on an open grid, clipped at the border.
pub fn shift(cell: usize, action: Action) -> usize {
    let (row, col) = (cell / SIDE, cell % SIDE);
    match action {
        Action::Up if row > 0 => cell - SIDE,
        Action::Down if row + 1 < SIDE => cell + SIDE,
        Action::Left if col > 0 => cell - 1,
        Action::Right if col + 1 < SIDE => cell + 1,
        _ => cell,
    }
}

/// One-hot encoding of the target position.
pub fn encode_observation(state: &GridState) -> Vec<f64> {
    let mut obs = vec![0.0; CELLS];
    obs[state.target_cell] = 1.0;
    obs
}

impl GridPhysics {
    pub fn new(config: &GridConfig) -> Result<Self> {
        check_cell(config.goal, "goal cell")?;
        let mut blocked = BTreeSet::new();
        for &[a, b] in &config.blocked {
            check_cell(a, "blocked cell")?;
            check_cell(b, "blocked cell")?;
            if !adjacent(a, b) {
                return Err(Error::Config(format!("blocked pair {a}|{b} is not adjacent")));
            }
            blocked.insert((a, b));
            blocked.insert((b, a));
        }
        let support = config.spawn.support();
        if support.is_empty() {
            return Err(Error::Config("respawn rule has no cells".into()));
        }
        for &c in &support {
            check_cell(c, "spawn cell")?;
            if c == config.goal {
                return Err(Error::Config(format!("spawn cell {c} is the goal")));
            }
        }
        let physics = GridPhysics {
            goal: config.goal,
            blocked,
            respawn: config.spawn.clone(),
        };
        for &c in &support {
            if physics.distance_to_goal(c).is_none() {
                return Err(Error::Config(format!("goal unreachable from spawn cell {c}")));
            }
        }
        Ok(physics)
    }

    pub fn goal(&self) -> usize {
        self.goal
    }

    pub fn respawn(&self) -> &RespawnRule {
        &self.respawn
    }

    pub fn is_blocked(&self, from: usize, to: usize) -> bool {
        self.blocked.contains(&(from, to))
    }

    /// Successor cell ignoring reward and respawn.
    pub fn move_target(&self, cell: usize, action: Action) -> usize {
        let next = shift(cell, action);
        if next != cell && self.is_blocked(cell, next) {
            cell
        } else {
            next
        }
    }

    /// Breadth-first step count from `cell` to the goal.
    pub fn distance_to_goal(&self, cell: usize) -> Option<usize> {
        let mut dist = [usize::MAX; CELLS];
        dist[cell] = 0;
        let mut queue = VecDeque::from([cell]);
        while let Some(c) = queue.pop_front() {
            if c == self.goal {
                return Some(dist[c]);
            }
            for a in Action::MOTORS {
                let n = self.move_target(c, a);
                if dist[n] == usize::MAX {
                    dist[n] = dist[c] + 1;
                    queue.push_back(n);
                }
            }
        }
        None
    }
}

/// Apply `action`. Returns the new state and whether the move reached the goal;
/// when it did, the returned state is already the respawned one.
pub fn grid_step(
    state: &GridState,
    action: Action,
    physics: &GridPhysics,
    rng: &mut ChaCha8Rng,
) -> (GridState, bool) {
    let landed = physics.move_target(state.target_cell, action);
    let rewarded = landed == physics.goal;
    let target_cell = if rewarded {
        physics.respawn.draw(rng)
    } else {
        landed
    };
    (
        GridState {
            target_cell,
            step: state.step + 1,
        },
        rewarded,
    )
}

/// A grid world with its own respawn generator.
#[derive(Debug, Clone)]
pub struct GridWorld {
    physics: GridPhysics,
    state: GridState,
    rng: ChaCha8Rng,
    reward_enabled: bool,
}

impl GridWorld {
    pub fn new(physics: GridPhysics, start_cell: usize, rng: ChaCha8Rng) -> Result<Self> {
        check_cell(start_cell, "start cell")?;
        Ok(GridWorld {
            physics,
            state: GridState::new(start_cell),
            rng,
            reward_enabled: true,
        })
    }

    pub fn physics(&self) -> &GridPhysics {
        &self.physics
    }

    pub fn state(&self) -> &GridState {
        &self.state
    }

    pub fn set_cell(&mut self, cell: usize) -> Result<()> {
        check_cell(cell, "cell")?;
        self.state.target_cell = cell;
        Ok(())
    }

    /// With the reward disabled the goal is an ordinary cell: no reward, no respawn.
    pub fn set_reward_enabled(&mut self, enabled: bool) {
        self.reward_enabled = enabled;
    }

    pub fn reward_enabled(&self) -> bool {
        self.reward_enabled
    }
}

impl Environment for GridWorld {
    fn observation(&self) -> Vec<f64> {
        encode_observation(&self.state)
    }

    fn motor_count(&self) -> usize {
        4
    }

    fn respond(&mut self, motor_firing: &[bool]) -> Result<Transition> {
        let action = decode_action(motor_firing);
        let landed = GridState::new(self.physics.move_target(self.state.target_cell, action));
        let rewarded = if self.reward_enabled {
            let (next, rewarded) = grid_step(&self.state, action, &self.physics, &mut self.rng);
            self.state = next;
            rewarded
        } else {
            self.state = GridState {
                target_cell: landed.target_cell,
                step: self.state.step + 1,
            };
            false
        };
        Ok(Transition {
            rewarded,
            source: RewardSource::PrimaryInput,
            next_observation: self.observation(),
            landed_observation: encode_observation(&landed),
            action: Some(action),
        })
    }
}
