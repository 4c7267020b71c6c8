//! Threshold-gated reinforcement learning for small multilayer perceptrons.
//!
//! Three learning schemes share one sense–act–reward–update loop:
//!
//! - [`tap`]: primary reinforcement. The reward turns the network's own
//!   thresholded output into a backpropagation target.
//! - [`tar`]: conditioned reinforcement. An extra output node learns a
//!   discounted reward estimate that can itself reward earlier actions.
//! - [`tac`]: a local rule that assigns a target to every node and only
//!   changes connections whose presynaptic node fired.
//!
//! [`backprop`] provides the supervised baseline, [`env`] the grid and XOR
//! worlds, and [`harness`] the experiment runner used by the `trl` CLI.

pub mod backprop;
pub mod env;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod network;
pub mod params;
pub mod persist;
pub mod reward;
pub mod tac;
pub mod tap;
pub mod tar;

pub use error::{Error, Result};
pub use harness::{run_experiment, Algorithm, ExperimentConfig, Task};
pub use metrics::TrialMetrics;
pub use network::{init_network, ActivationSnapshot, Network};
pub use params::{LearningParams, PunishRange};
