//! Reward signals and the desired activation patterns derived from them.

use serde::{Deserialize, Serialize};

/// Where a reward decision came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardSource {
    /// The designated input reward node was active in the `t+1` observation.
    PrimaryInput,
    /// The output reward node exceeded the conditioned-reward threshold at `t+1`.
    ConditionedOutput,
    /// The framework judged the response directly (guided tasks).
    FrameworkRule,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardSignal {
    pub rewarded: bool,
    pub source: RewardSource,
    /// 1.0 for primary and framework rewards; the observed reward-node
    /// activation for conditioned rewards.
    pub reward_value: f64,
}

impl RewardSignal {
    pub fn primary() -> Self {
        RewardSignal {
            rewarded: true,
            source: RewardSource::PrimaryInput,
            reward_value: 1.0,
        }
    }

    pub fn conditioned(value: f64) -> Self {
        RewardSignal {
            rewarded: true,
            source: RewardSource::ConditionedOutput,
            reward_value: value,
        }
    }

    pub fn framework(rewarded: bool) -> Self {
        RewardSignal {
            rewarded,
            source: RewardSource::FrameworkRule,
            reward_value: if rewarded { 1.0 } else { 0.0 },
        }
    }

    /// A punishment; `observed` is whatever reward reading fell short.
    pub fn punished(source: RewardSource, observed: f64) -> Self {
        RewardSignal {
            rewarded: false,
            source,
            reward_value: observed,
        }
    }
}

/// Desired activations for the output layer, one per output node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesiredPattern(pub Vec<f64>);

impl DesiredPattern {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for DesiredPattern {
    fn from(v: Vec<f64>) -> Self {
        DesiredPattern(v)
    }
}
