//! Primary reinforcement by threshold assignment of patterns.
//!
//! The reward read from the next observation turns the network's own output
//! into a training target: under reward every output is pushed to the side of
//! the threshold it is already on; under punishment every output is pulled
//! to a random value near the threshold, which seeds a new candidate response.

use rand::Rng;

use crate::backprop::{backprop_update, ErrorSignal, WeightChanges};
use crate::env::{Action, Environment};
use crate::error::{Error, Result};
use crate::network::{ActivationSnapshot, Network};
use crate::params::LearningParams;
use crate::reward::{DesiredPattern, RewardSignal, RewardSource};

/// Everything one learning step saw and did.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// Forward-pass index of the state-`t` presentation.
    pub presentation: u64,
    pub observation_t: Vec<f64>,
    pub motor_firing: Vec<bool>,
    pub action: Option<Action>,
    pub observation_t1: Vec<f64>,
    pub reward: RewardSignal,
    /// Desired output-layer activations.
    pub desired: DesiredPattern,
    /// Activations at state `t` that the update was computed from.
    pub snapshot_t: ActivationSnapshot,
    pub deltas: ErrorSignal,
    pub changes: WeightChanges,
    /// Per-node desired activations for every non-input layer (local rule only).
    pub node_targets: Option<Vec<Vec<f64>>>,
}

#[inline]
pub(crate) fn punish_draw<R: Rng + ?Sized>(params: &LearningParams, rng: &mut R) -> f64 {
    if params.punish_low == params.punish_high {
        params.punish_low
    } else {
        rng.gen_range(params.punish_low..=params.punish_high)
    }
}

/// Desired output pattern from the reward signal and the state-`t` outputs.
pub fn tap_desired<R: Rng + ?Sized>(
    output_acts_t: &[f64],
    thresholds: &[f64],
    reward: &RewardSignal,
    params: &LearningParams,
    rng: &mut R,
) -> Result<DesiredPattern> {
    if output_acts_t.len() != thresholds.len() {
        return Err(Error::shape("tap_desired thresholds", output_acts_t.len(), thresholds.len()));
    }
    let desired = if reward.rewarded {
        output_acts_t
            .iter()
            .zip(thresholds)
            .map(|(a, t)| if a > t { 1.0 } else { 0.0 })
            .collect()
    } else {
        output_acts_t.iter().map(|_| punish_draw(params, rng)).collect()
    };
    Ok(DesiredPattern(desired))
}

/// Reward signal for a transition judged only by the environment.
pub(crate) fn environment_reward(rewarded: bool, source: RewardSource) -> RewardSignal {
    match (rewarded, source) {
        (true, RewardSource::FrameworkRule) => RewardSignal::framework(true),
        (false, RewardSource::FrameworkRule) => RewardSignal::framework(false),
        (true, _) => RewardSignal::primary(),
        (false, s) => RewardSignal::punished(s, 0.0),
    }
}

pub(crate) fn motor_firing(net: &Network, snapshot: &ActivationSnapshot, motors: usize) -> Result<Vec<bool>> {
    if motors > net.output_size() {
        return Err(Error::shape("motor nodes", net.output_size(), motors));
    }
    Ok(snapshot.output()[..motors]
        .iter()
        .zip(net.output_thresholds())
        .map(|(a, t)| a > t)
        .collect())
}

/// One sense–act–reward–update cycle:
/// forward state `t`, act on the thresholded outputs, read the reward from
/// state `t+1`, then backpropagate the derived targets on the `t` snapshot.
pub fn tap_step<E: Environment + ?Sized, R: Rng + ?Sized>(
    net: &mut Network,
    env: &mut E,
    params: &LearningParams,
    rng: &mut R,
) -> Result<StepRecord> {
    let observation_t = env.observation();
    let snapshot_t = net.forward(&observation_t)?.clone();
    let firing = motor_firing(net, &snapshot_t, env.motor_count())?;
    let transition = env.respond(&firing)?;
    let reward = environment_reward(transition.rewarded, transition.source);
    let desired = tap_desired(snapshot_t.output(), net.output_thresholds(), &reward, params, rng)?;
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
