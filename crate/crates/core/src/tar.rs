//! Conditioned reinforcement by threshold assignment of rewards.
//!
//! An extra, non-motor output node learns a discounted estimate of upcoming
//! reward. Once its activation for a state exceeds the conditioned-reward
//! threshold, reaching that state rewards the preceding action just as the
//! primary reward does, so behaviour chains grow backwards from the goal.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::backprop::backprop_update;
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::network::{Network, DEFAULT_THRESHOLD};
use crate::params::LearningParams;
use crate::reward::{DesiredPattern, RewardSignal, RewardSource};
use crate::tap::{environment_reward, motor_firing, punish_draw, StepRecord};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TarConfig {
    /// Output node that carries the learned reward estimate.
    pub reward_output_index: usize,
    pub gamma: f64,
    /// Activation above which the reward node counts as a conditioned reward.
    pub reward_threshold_out: f64,
    /// Firing threshold used by the discounted target rule.
    pub node_threshold: f64,
}

impl TarConfig {
    pub fn new(reward_output_index: usize, params: &LearningParams) -> Result<Self> {
        let cfg = TarConfig {
            reward_output_index,
            gamma: params.gamma,
            reward_threshold_out: params.reward_threshold_out,
            node_threshold: DEFAULT_THRESHOLD,
        };
        if !(cfg.gamma > 0.0 && cfg.gamma < 1.0) {
            return Err(Error::Config(format!(
                "conditioned reinforcement needs gamma in (0, 1), got {}",
                cfg.gamma
            )));
        }
        Ok(cfg)
    }

    /// Check the reward node sits in the output layer after all motor nodes.
    pub fn check_against(&self, net: &Network, motors: usize) -> Result<()> {
        if self.reward_output_index < motors {
            return Err(Error::Config(format!(
                "reward output node {} overlaps the {motors} motor nodes",
                self.reward_output_index
            )));
        }
        if self.reward_output_index >= net.output_size() {
            return Err(Error::shape(
                "reward output node",
                self.reward_output_index + 1,
                net.output_size(),
            ));
        }
        Ok(())
    }
}

/// Discounted target for the reward node: `γ a` when `a` fires, else 0.
pub fn tar_reward_desired(a_reward_t1: f64, cfg: &TarConfig) -> f64 {
    if a_reward_t1 > cfg.node_threshold {
        cfg.gamma * a_reward_t1
    } else {
        0.0
    }
}

pub fn conditioned_reward_check(a_reward_t1: f64, cfg: &TarConfig) -> bool {
    a_reward_t1 > cfg.reward_threshold_out
}

/// Primary reward wins over a simultaneous conditioned one.
pub fn combine_reward(primary: RewardSignal, a_reward_t1: f64, cfg: &TarConfig) -> RewardSignal {
    if primary.rewarded {
        primary
    } else if conditioned_reward_check(a_reward_t1, cfg) {
        RewardSignal::conditioned(a_reward_t1)
    } else {
        RewardSignal::punished(RewardSource::ConditionedOutput, a_reward_t1)
    }
}

/// Target for the reward node given the step's reward decision.
pub fn reward_node_target(reward: &RewardSignal, cfg: &TarConfig) -> f64 {
    match (reward.rewarded, reward.source) {
        (false, _) => 0.0,
        (true, RewardSource::ConditionedOutput) => tar_reward_desired(reward.reward_value, cfg),
        (true, _) => cfg.gamma * reward.reward_value,
    }
}

/// Output-layer targets: motors follow the pattern rule, the reward node the
/// discounted rule.
pub fn tar_desired<R: Rng + ?Sized>(
    output_acts_t: &[f64],
    thresholds: &[f64],
    reward: &RewardSignal,
    cfg: &TarConfig,
    params: &LearningParams,
    rng: &mut R,
) -> Result<DesiredPattern> {
    if output_acts_t.len() != thresholds.len() {
        return Err(Error::shape("tar_desired thresholds", output_acts_t.len(), thresholds.len()));
    }
    if cfg.reward_output_index >= output_acts_t.len() {
        return Err(Error::shape(
            "reward output node",
            cfg.reward_output_index + 1,
            output_acts_t.len(),
        ));
    }
    let desired = output_acts_t
        .iter()
        .zip(thresholds)
        .enumerate()
        .map(|(u, (a, t))| {
            if u == cfg.reward_output_index {
                reward_node_target(reward, cfg)
            } else if reward.rewarded {
                if a > t {
                    1.0
                } else {
                    0.0
                }
            } else {
                punish_draw(params, rng)
            }
        })
        .collect();
    Ok(DesiredPattern(desired))
}

/// One conditioned-reinforcement cycle. The `t+1` observation is propagated
/// with the pre-update weights to read the reward node; the update then
/// backpropagates on the stored `t` snapshot.
pub fn tar_step<E: Environment + ?Sized, R: Rng + ?Sized>(
    net: &mut Network,
    env: &mut E,
    cfg: &TarConfig,
    params: &LearningParams,
    rng: &mut R,
) -> Result<StepRecord> {
    cfg.check_against(net, env.motor_count())?;
    let observation_t = env.observation();
    let snapshot_t = net.forward(&observation_t)?.clone();
    let firing = motor_firing(net, &snapshot_t, env.motor_count())?;
    let transition = env.respond(&firing)?;
    let a_reward_t1 = net.forward(&transition.landed_observation)?.output()[cfg.reward_output_index];
    let reward = combine_reward(
        environment_reward(transition.rewarded, transition.source),
        a_reward_t1,
        cfg,
    );
    let desired = tar_desired(snapshot_t.output(), net.output_thresholds(), &reward, cfg, params, rng)?;
    let update = backprop_update(net, &snapshot_t, &desired, params)?;
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
        node_targets: None,
    })
}
