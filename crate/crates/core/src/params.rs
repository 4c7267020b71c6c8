use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hyperparameters shared by every learning rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LearningParams {
    pub lrate: f64,
    /// Discount applied to the reward value propagated into the reward node.
    pub gamma: f64,
    /// Activation the output reward node must exceed to act as a conditioned reward.
    pub reward_threshold_out: f64,
    /// Lower end of the desired-activation range drawn under punishment.
    pub punish_low: f64,
    pub punish_high: f64,
    pub mature_hi: f64,
    pub mature_lo: f64,
}

impl Default for LearningParams {
    fn default() -> Self {
        LearningParams {
            lrate: 1.0,
            gamma: 0.95,
            reward_threshold_out: 0.8,
            punish_low: 0.45,
            punish_high: 0.55,
            mature_hi: 0.9,
            mature_lo: 0.1,
        }
    }
}

/// The two punishment ranges in use: a narrow band around the threshold, or the whole unit interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PunishRange {
    Narrow,
    Full,
}

impl PunishRange {
    pub fn bounds(self) -> (f64, f64) {
        match self {
            PunishRange::Narrow => (0.45, 0.55),
            PunishRange::Full => (0.0, 1.0),
        }
    }
}

impl LearningParams {
    pub fn with_punish_range(mut self, range: PunishRange) -> Self {
        (self.punish_low, self.punish_high) = range.bounds();
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.lrate.is_finite() && self.lrate > 0.0) {
            return fail(format!("lrate must be positive, got {}", self.lrate));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return fail(format!("gamma must lie in (0, 1], got {}", self.gamma));
        }
        if !(self.reward_threshold_out > 0.0 && self.reward_threshold_out < 1.0) {
            return fail(format!(
                "reward threshold must lie in (0, 1), got {}",
                self.reward_threshold_out
            ));
        }
        if !(0.0 <= self.punish_low && self.punish_low <= self.punish_high && self.punish_high <= 1.0)
        {
            return fail(format!(
                "punish range must satisfy 0 <= low <= high <= 1, got [{}, {}]",
                self.punish_low, self.punish_high
            ));
        }
        if !(0.0 < self.mature_lo && self.mature_lo < self.mature_hi && self.mature_hi < 1.0) {
            return fail(format!(
                "maturity bounds must satisfy 0 < lo < hi < 1, got ({}, {})",
                self.mature_lo, self.mature_hi
            ));
        }
        Ok(())
    }

    #[inline]
    pub fn is_mature(&self, activation: f64) -> bool {
        activation > self.mature_hi || activation < self.mature_lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        LearningParams::default().validate().unwrap();
        LearningParams::default()
            .with_punish_range(PunishRange::Full)
            .validate()
            .unwrap();
    }

    #[test]
    fn rejects_out_of_range_values() {
        let bad = [
            LearningParams { lrate: 0.0, ..Default::default() },
            LearningParams { gamma: 1.5, ..Default::default() },
            LearningParams { gamma: 0.0, ..Default::default() },
            LearningParams { punish_low: 0.6, ..Default::default() },
            LearningParams { reward_threshold_out: 1.0, ..Default::default() },
            LearningParams { mature_lo: 0.95, ..Default::default() },
        ];
        for p in bad {
            assert!(matches!(p.validate(), Err(Error::Config(_))), "{p:?}");
        }
    }
}
