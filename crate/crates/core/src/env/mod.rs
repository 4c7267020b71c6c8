//! Simulated worlds the agent acts in.

pub mod grid;
pub mod xor;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::reward::RewardSource;

pub use grid::{GridConfig, GridPhysics, GridState, GridWorld, RespawnRule};
pub use xor::XorGuidedTask;

/// Motor commands, in output-node order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    Up,
    Down,
    Left,
    Right,
    Stay,
}

impl Action {
    pub const MOTORS: [Action; 4] = [Action::Up, Action::Down, Action::Left, Action::Right];
}

/// The unique firing motor, or `Stay` when zero or several motors fire.
pub fn decode_action(firing: &[bool]) -> Action {
    let mut fired = firing.iter().take(4).enumerate().filter(|(_, &f)| f);
    match (fired.next(), fired.next()) {
        (Some((i, _)), None) => Action::MOTORS[i],
        _ => Action::Stay,
    }
}

/// Outcome of one agent response.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    /// Whether the environment's own reward rule fired on the post-action state.
    pub rewarded: bool,
    pub source: RewardSource,
    /// Input pattern for the next presentation (after any respawn).
    pub next_observation: Vec<f64>,
    /// Pattern of the state the action led to, before any respawn. Reward
    /// readings at `t+1` use this one.
    pub landed_observation: Vec<f64>,
    pub action: Option<Action>,
}

/// A world that presents input patterns and reacts to the agent's motor firing.
pub trait Environment {
    fn observation(&self) -> Vec<f64>;

    /// Number of leading output nodes the environment reads as motors.
    fn motor_count(&self) -> usize;

    fn respond(&mut self, motor_firing: &[bool]) -> Result<Transition>;
}
