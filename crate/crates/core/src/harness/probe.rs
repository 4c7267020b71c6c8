//! Learning-free probes of a network's current policy.
//!
//! Probes call [`Network::evaluate`], which never touches the stored
//! activation snapshots or weights, so probing cannot perturb training.

use std::collections::BTreeMap;

use crate::backprop::{dataset_converged, LabeledPattern};
use crate::env::grid::{encode_observation, GridState, CELLS, DIAMETER};
use crate::env::{decode_action, GridPhysics};
use crate::error::Result;
use crate::metrics::{GridReadout, Rollout};
use crate::network::Network;
use crate::params::LearningParams;

/// Step limit for a greedy rollout.
pub const ROLLOUT_LIMIT: usize = 2 * DIAMETER;

const MOTORS: usize = 4;

fn motor_firing(net: &Network, output: &[f64]) -> Vec<bool> {
    output[..MOTORS]
        .iter()
        .zip(net.output_thresholds())
        .map(|(a, t)| a > t)
        .collect()
}

/// Follow the thresholded policy from `start` until the goal or the step limit.
/// Stops early at the first state with an immature motor response unless
/// `full` is set.
pub fn greedy_rollout(
    net: &Network,
    physics: &GridPhysics,
    start: usize,
    reward_node: Option<usize>,
    params: &LearningParams,
    full: bool,
) -> Result<Rollout> {
    let mut rollout = Rollout {
        path: vec![start],
        actions: Vec::new(),
        reward_node: Vec::new(),
        reached_goal: false,
        mature: true,
    };
    let mut cell = start;
    for _ in 0..ROLLOUT_LIMIT {
        let out = net.evaluate_output(&encode_observation(&GridState::new(cell)))?;
        if let Some(r) = reward_node {
            rollout.reward_node.push(out[r]);
        }
        if !out[..MOTORS].iter().all(|&a| params.is_mature(a)) {
            rollout.mature = false;
            if !full {
                return Ok(rollout);
            }
        }
        let action = decode_action(&motor_firing(net, &out));
        rollout.actions.push(action);
        cell = physics.move_target(cell, action);
        rollout.path.push(cell);
        if cell == physics.goal() {
            rollout.reached_goal = true;
            return Ok(rollout);
        }
    }
    Ok(rollout)
}

/// Grid convergence: every required start cell's rollout reaches the goal
/// within the step limit with mature motor outputs throughout.
pub fn grid_converged(
    net: &Network,
    physics: &GridPhysics,
    required: &[usize],
    params: &LearningParams,
) -> Result<bool> {
    for &cell in required {
        if !greedy_rollout(net, physics, cell, None, params, false)?.learnt() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// XOR convergence: all four patterns correct with a mature output.
pub fn xor_converged(net: &Network, dataset: &[LabeledPattern], params: &LearningParams) -> Result<bool> {
    dataset_converged(net, dataset, params)
}

/// Outputs and greedy policy for every cell, plus full rollouts from `starts`.
pub fn grid_readout(
    net: &Network,
    physics: &GridPhysics,
    starts: &[usize],
    reward_node: Option<usize>,
    params: &LearningParams,
    presentation: u64,
) -> Result<GridReadout> {
    let mut outputs = BTreeMap::new();
    let mut policy = BTreeMap::new();
    for cell in 0..CELLS {
        let out = net.evaluate_output(&encode_observation(&GridState::new(cell)))?;
        policy.insert(cell, decode_action(&motor_firing(net, &out)));
        outputs.insert(cell, out);
    }
    let mut rollouts = BTreeMap::new();
    for &s in starts {
        rollouts.insert(s, greedy_rollout(net, physics, s, reward_node, params, true)?);
    }
    Ok(GridReadout {
        presentation,
        outputs,
        policy,
        rollouts,
    })
}
