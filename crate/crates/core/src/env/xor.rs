//! Guided XOR: the four patterns are cycled in a fixed order regardless of the
//! agent's response, and the framework rewards correct thresholded outputs.

use super::{Environment, Transition};
use crate::backprop::LabeledPattern;
use crate::error::{Error, Result};
use crate::reward::RewardSource;

pub const XOR_PATTERNS: [([f64; 2], bool); 4] = [
    ([0.0, 0.0], false),
    ([0.0, 1.0], true),
    ([1.0, 0.0], true),
    ([1.0, 1.0], false),
];

/// The XOR truth table as a supervised dataset, in presentation order.
pub fn xor_dataset() -> Vec<LabeledPattern> {
    XOR_PATTERNS
        .iter()
        .map(|(x, y)| (x.to_vec(), vec![if *y { 1.0 } else { 0.0 }]))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct XorGuidedTask {
    index: usize,
}

impl XorGuidedTask {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn current_input(&self) -> [f64; 2] {
        XOR_PATTERNS[self.index].0
    }

    pub fn current_truth(&self) -> bool {
        XOR_PATTERNS[self.index].1
    }
}

/// Reward iff the thresholded output equals the truth value, then advance the cycle.
pub fn xor_guided_step(task: &mut XorGuidedTask, thresholded_output: bool) -> (bool, [f64; 2]) {
    let rewarded = thresholded_output == task.current_truth();
    task.index = (task.index + 1) % XOR_PATTERNS.len();
    (rewarded, task.current_input())
}

impl Environment for XorGuidedTask {
    fn observation(&self) -> Vec<f64> {
        self.current_input().to_vec()
    }

    fn motor_count(&self) -> usize {
        1
    }

    fn respond(&mut self, motor_firing: &[bool]) -> Result<Transition> {
        let fired = *motor_firing
            .first()
            .ok_or_else(|| Error::Environment("XOR task needs one output node".into()))?;
        let (rewarded, next) = xor_guided_step(self, fired);
        Ok(Transition {
            rewarded,
            source: RewardSource::FrameworkRule,
            next_observation: next.to_vec(),
            landed_observation: next.to_vec(),
            action: None,
        })
    }
}
