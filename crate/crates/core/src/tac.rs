//! Threshold assignment of connections: a local, backprop-free update.
//!
//! Every non-input node derives its own desired activation from the reward
//! signal and its own firing state, and only connections whose presynaptic
//! node fired at state `t` are changed. No error flows between layers.

use rand::Rng;

use crate::backprop::{output_delta, ErrorSignal, WeightChanges};
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::network::{ActivationSnapshot, Network};
use crate::params::LearningParams;
use crate::reward::{DesiredPattern, RewardSignal};
use crate::tap::{environment_reward, motor_firing, punish_draw, StepRecord};
use crate::tar::{combine_reward, reward_node_target, TarConfig};

/// Per-node targets and per-connection eligibility for one update.
#[derive(Debug, Clone, PartialEq)]
pub struct TacNodeTarget {
    /// Desired activation of every node in layers `1..`; `desired[0]` is layer 1.
    pub desired: Vec<Vec<f64>>,
    /// `eligible[l][h]`: node `h` of layer `l` fired at state `t` (input layer included).
    pub eligible: Vec<Vec<bool>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TacUpdate {
    pub targets: TacNodeTarget,
    pub deltas: ErrorSignal,
    pub changes: WeightChanges,
}

/// Ungated node target: 1/0 by the node's own firing under reward, a moderate
/// random value under punishment.
pub fn node_target<R: Rng + ?Sized>(
    a_u_t: f64,
    theta_u: f64,
    reward: &RewardSignal,
    params: &LearningParams,
    rng: &mut R,
) -> f64 {
    if reward.rewarded {
        if a_u_t > theta_u {
            1.0
        } else {
            0.0
        }
    } else {
        punish_draw(params, rng)
    }
}

/// Desired activation of node `u` as seen through its connection from `h`.
/// A silent presynaptic node leaves the target at the actual activation.
#[allow(clippy::too_many_arguments)]
pub fn tac_desired<R: Rng + ?Sized>(
    a_u_t: f64,
    theta_u: f64,
    a_h_t: f64,
    theta_h: f64,
    reward: &RewardSignal,
    params: &LearningParams,
    rng: &mut R,
) -> f64 {
    if a_h_t > theta_h {
        node_target(a_u_t, theta_u, reward, params, rng)
    } else {
        a_u_t
    }
}

/// Apply the local rule for every non-input node, using only the frozen `t` snapshot.
///
/// One target is drawn per node and shared by all of its gated connections.
/// Bias units always fire. When `tar` is given, its reward node takes the
/// discounted reward target instead of the pattern rule.
pub fn tac_update<R: Rng + ?Sized>(
    net: &mut Network,
    snapshot_t: &ActivationSnapshot,
    reward: &RewardSignal,
    tar: Option<&TarConfig>,
    params: &LearningParams,
    rng: &mut R,
) -> Result<TacUpdate> {
    snapshot_t.check_shape(net.layer_sizes())?;
    let top = net.layer_count() - 1;
    if let Some(cfg) = tar {
        if cfg.reward_output_index >= net.output_size() {
            return Err(Error::shape(
                "reward output node",
                cfg.reward_output_index + 1,
                net.output_size(),
            ));
        }
    }
    let layers = &snapshot_t.layers;
    let thresholds = net.thresholds();

    let eligible: Vec<Vec<bool>> = layers
        .iter()
        .zip(thresholds)
        .map(|(acts, th)| acts.iter().zip(th).map(|(a, t)| a > t).collect())
        .collect();

    let mut desired = Vec::with_capacity(top);
    let mut deltas = Vec::with_capacity(top);
    for l in 1..=top {
        let mut d_layer = Vec::with_capacity(layers[l].len());
        let mut delta_layer = Vec::with_capacity(layers[l].len());
        for (u, &a_u) in layers[l].iter().enumerate() {
            let d_u = match tar {
                Some(cfg) if l == top && u == cfg.reward_output_index => reward_node_target(reward, cfg),
                _ => node_target(a_u, thresholds[l][u], reward, params, rng),
            };
            d_layer.push(d_u);
            delta_layer.push(output_delta(d_u, a_u));
        }
        desired.push(d_layer);
        deltas.push(delta_layer);
    }

    let mut changes = WeightChanges::zeros_like(net);
    for l in 0..top {
        let below = &layers[l];
        let gate = &eligible[l];
        for (u, &delta_u) in deltas[l].iter().enumerate() {
            let step = params.lrate * delta_u;
            let row = changes.weights[l].row_mut(u);
            for h in 0..below.len() {
                if gate[h] {
                    row[h] = step * below[h];
                }
            }
            changes.biases[l][u] = step;
        }
    }
    changes.apply(net);
    Ok(TacUpdate {
        targets: TacNodeTarget { desired, eligible },
        deltas: ErrorSignal { layers: deltas },
        changes,
    })
}

/// As [`crate::tar::tar_step`] with the local rule in place of backpropagation.
/// Without a reward node (`tar = None`) only the environment's reward counts.
pub fn tac_step<E: Environment + ?Sized, R: Rng + ?Sized>(
    net: &mut Network,
    env: &mut E,
    tar: Option<&TarConfig>,
    params: &LearningParams,
    rng: &mut R,
) -> Result<StepRecord> {
    if let Some(cfg) = tar {
        cfg.check_against(net, env.motor_count())?;
    }
    let observation_t = env.observation();
    let snapshot_t = net.forward(&observation_t)?.clone();
    let firing = motor_firing(net, &snapshot_t, env.motor_count())?;
    let transition = env.respond(&firing)?;
    let primary = environment_reward(transition.rewarded, transition.source);
    let reward = match tar {
        Some(cfg) => {
            let a_reward_t1 =
                net.forward(&transition.landed_observation)?.output()[cfg.reward_output_index];
            combine_reward(primary, a_reward_t1, cfg)
        }
        None => primary,
    };
    let update = tac_update(net, &snapshot_t, &reward, tar, params, rng)?;
    let desired = DesiredPattern(update.targets.desired.last().cloned().unwrap_or_default());
    Ok(StepRecord {
        presentation: snapshot_t.step,
        observation_t,
        motor_firing: firing,
        action: transition.action,
        observation_t1: transition.next_observation,
        reward,
        desired,
        snapshot_t,
        deltas: update.deltas,
        changes: update.changes,
        node_targets: Some(update.targets.desired),
    })
}
