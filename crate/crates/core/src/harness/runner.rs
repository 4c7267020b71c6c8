use std::collections::BTreeSet;
use std::io::Write;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{Algorithm, ExperimentConfig, Task, TraceLevel, REWARD_NODE};
use super::probe::{greedy_rollout, grid_readout, xor_converged};
use crate::backprop::{train_supervised, SupervisedStop};
use crate::env::xor::xor_dataset;
use crate::env::{Action, Environment, GridPhysics, GridWorld, XorGuidedTask};
use crate::error::{Error, Result};
use crate::metrics::{CellMetrics, ExtinctionReport, GridReadout, TrialMetrics};
use crate::network::{init_network, Network};
use crate::params::LearningParams;
use crate::reward::{RewardSignal, RewardSource};
use crate::tac::tac_step;
use crate::tap::{tap_step, StepRecord};
use crate::tar::{tar_step, TarConfig};

const LEARNING_STREAM: u64 = 1;
const ENVIRONMENT_STREAM: u64 = 2;
const MOTOR_OUTPUTS: usize = 4;

/// Generator for one of the independent random streams of a run. Stream 0
/// seeds weight initialisation, so runs with the same seed share initial
/// weights whatever the algorithm.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy)]
enum Learner {
    Tap,
    Tar(TarConfig),
    Tac(Option<TarConfig>),
}

impl Learner {
    fn step(
        &self,
        net: &mut Network,
        env: &mut dyn Environment,
        params: &LearningParams,
        rng: &mut ChaCha8Rng,
    ) -> Result<StepRecord> {
        match self {
            Learner::Tap => tap_step(net, env, params, rng),
            Learner::Tar(cfg) => tar_step(net, env, cfg, params, rng),
            Learner::Tac(cfg) => tac_step(net, env, cfg.as_ref(), params, rng),
        }
    }
}

#[derive(Serialize)]
struct TraceRecord<'a> {
    presentation: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    cell: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    input: Option<&'a [f64]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    action: Option<Action>,
    firing: &'a [bool],
    rewarded: bool,
    source: RewardSource,
    reward_value: f64,
    desired: &'a [f64],
}

/// Result of a run: its metrics and the trained network.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub metrics: TrialMetrics,
    pub network: Network,
}

/// One configured run. Optionally starts from supplied weights and streams a
/// JSON-lines trace.
pub struct Experiment<'a> {
    cfg: &'a ExperimentConfig,
    network: Option<Network>,
    trace: Option<&'a mut dyn Write>,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<TrialMetrics> {
    Ok(Experiment::new(cfg).run()?.metrics)
}

impl<'a> Experiment<'a> {
    pub fn new(cfg: &'a ExperimentConfig) -> Self {
        Experiment {
            cfg,
            network: None,
            trace: None,
        }
    }

    /// Start from these weights instead of a fresh initialisation.
    pub fn with_network(mut self, network: Network) -> Self {
        self.network = Some(network);
        self
    }

    pub fn with_trace(mut self, sink: &'a mut dyn Write) -> Self {
        self.trace = Some(sink);
        self
    }

    pub fn run(mut self) -> Result<RunOutcome> {
        let cfg = self.cfg;
        cfg.validate()?;
        let mut net = match self.network.take() {
            Some(net) => {
                if net.layer_sizes() != cfg.layer_sizes.as_slice() {
                    return Err(Error::Config(format!(
                        "loaded network has layers {:?}, configuration needs {:?}",
                        net.layer_sizes(),
                        cfg.layer_sizes
                    )));
                }
                net
            }
            None => init_network(&cfg.layer_sizes, cfg.init_half_width, cfg.seed)?,
        };
        let started = Instant::now();
        let mut metrics = match cfg.task {
            Task::Xor => self.run_xor(&mut net)?,
            Task::Tracking | Task::Maze => self.run_grid(&mut net)?,
        };
        metrics.seed = cfg.seed;
        metrics.wall_clock = started.elapsed();
        Ok(RunOutcome {
            metrics,
            network: net,
        })
    }

    fn learner(&self) -> Result<Learner> {
        let tar = if self.cfg.uses_reward_node() {
            Some(TarConfig::new(REWARD_NODE, &self.cfg.params)?)
        } else {
            None
        };
        Ok(match self.cfg.algorithm {
            Algorithm::Tap => Learner::Tap,
            Algorithm::Tar => Learner::Tar(tar.ok_or_else(|| {
                Error::Config("conditioned reinforcement requires a reward output node".into())
            })?),
            Algorithm::Tac => Learner::Tac(tar),
            Algorithm::Supervised => {
                return Err(Error::Config("supervised runs have no reinforcement learner".into()))
            }
        })
    }

    fn emit(&mut self, rec: &StepRecord, cell: Option<usize>) -> Result<()> {
        let Some(sink) = self.trace.as_mut() else {
            return Ok(());
        };
        let wanted = match self.cfg.trace {
            TraceLevel::Off => false,
            TraceLevel::Rewards => rec.reward.rewarded,
            TraceLevel::Steps => true,
        };
        if !wanted {
            return Ok(());
        }
        let line = TraceRecord {
            presentation: rec.presentation,
            cell,
            input: cell.is_none().then_some(rec.observation_t.as_slice()),
            action: rec.action,
            firing: &rec.motor_firing,
            rewarded: rec.reward.rewarded,
            source: rec.reward.source,
            reward_value: rec.reward.reward_value,
            desired: rec.desired.as_slice(),
        };
        serde_json::to_writer(&mut **sink, &line).map_err(|e| Error::Io(e.to_string()))?;
        sink.write_all(b"\n")?;
        Ok(())
    }

    fn run_xor(&mut self, net: &mut Network) -> Result<TrialMetrics> {
        let cfg = self.cfg;
        let dataset = xor_dataset();
        if cfg.algorithm == Algorithm::Supervised {
            let stop = SupervisedStop {
                max_presentations: cfg.max_presentations,
            };
            return train_supervised(net, &dataset, &cfg.params, stop);
        }
        let learner = self.learner()?;
        let mut rng = rng_stream(cfg.seed, LEARNING_STREAM);
        let mut env = XorGuidedTask::new();
        let mut metrics = TrialMetrics::default();
        if xor_converged(net, &dataset, &cfg.params)? {
            metrics.presentations_to_convergence = Some(0);
        }
        let mut presentations = 0;
        while presentations < cfg.max_presentations
            && (metrics.presentations_to_convergence.is_none() || cfg.continue_after_convergence)
        {
            let rec = learner.step(net, &mut env, &cfg.params, &mut rng)?;
            presentations += 1;
            tally(&mut metrics, &rec.reward);
            self.emit(&rec, None)?;
            if metrics.presentations_to_convergence.is_none()
                && presentations % cfg.probe_interval == 0
                && xor_converged(net, &dataset, &cfg.params)?
            {
                metrics.presentations_to_convergence = Some(presentations);
            }
        }
        metrics.presentations = presentations;
        metrics.converged = metrics.presentations_to_convergence.is_some();
        Ok(metrics)
    }

    fn run_grid(&mut self, net: &mut Network) -> Result<TrialMetrics> {
        let cfg = self.cfg;
        let grid = cfg.grid.as_ref().expect("validated grid config");
        let physics = GridPhysics::new(grid)?;
        let start = match cfg.start_cell {
            Some(c) => c,
            None => physics.respawn().support()[0],
        };
        let mut world = GridWorld::new(physics.clone(), start, rng_stream(cfg.seed, ENVIRONMENT_STREAM))?;
        let learner = self.learner()?;
        let reward_node = cfg.uses_reward_node().then_some(REWARD_NODE);
        let mut rng = rng_stream(cfg.seed, LEARNING_STREAM);

        let mut metrics = TrialMetrics::default();
        for cell in (0..crate::env::grid::CELLS).filter(|&c| c != physics.goal()) {
            metrics.cells.insert(cell, CellMetrics::default());
        }
        let mut presentations = 0u64;
        let probe = |net: &Network, metrics: &mut TrialMetrics, presentations: u64| -> Result<()> {
            let mut all_required = true;
            for (&cell, cm) in metrics.cells.iter_mut() {
                let learnt = greedy_rollout(net, &physics, cell, None, &cfg.params, false)?.learnt();
                if learnt && cm.learnt_at.is_none() {
                    cm.learnt_at = Some(presentations);
                }
                if !learnt && cfg.required_cells.contains(&cell) {
                    all_required = false;
                }
            }
            if all_required && metrics.presentations_to_convergence.is_none() {
                metrics.presentations_to_convergence = Some(presentations);
                metrics.at_convergence = Some(grid_readout(
                    net,
                    &physics,
                    &cfg.required_cells,
                    reward_node,
                    &cfg.params,
                    presentations,
                )?);
            }
            Ok(())
        };

        probe(net, &mut metrics, 0)?;
        while presentations < cfg.max_presentations
            && (metrics.presentations_to_convergence.is_none() || cfg.continue_after_convergence)
        {
            let cell_t = world.state().target_cell;
            let rec = learner.step(net, &mut world, &cfg.params, &mut rng)?;
            presentations += 1;
            tally(&mut metrics, &rec.reward);
            if let Some(r) = reward_node {
                if rec.snapshot_t.output()[r] > cfg.params.reward_threshold_out {
                    if let Some(cm) = metrics.cells.get_mut(&cell_t) {
                        cm.breadcrumb_at.get_or_insert(presentations);
                    }
                }
            }
            self.emit(&rec, Some(cell_t))?;
            if presentations.is_multiple_of(cfg.probe_interval) || presentations == cfg.max_presentations {
                probe(net, &mut metrics, presentations)?;
            }
        }
        metrics.presentations = presentations;
        metrics.converged = metrics.presentations_to_convergence.is_some();

        if let (Some(extra), Some(converged)) = (cfg.extinction_presentations, metrics.at_convergence.clone()) {
            world.set_reward_enabled(false);
            for _ in 0..extra {
                let cell_t = world.state().target_cell;
                let rec = learner.step(net, &mut world, &cfg.params, &mut rng)?;
                tally(&mut metrics, &rec.reward);
                self.emit(&rec, Some(cell_t))?;
            }
            world.set_reward_enabled(true);
            let after = grid_readout(
                net,
                &physics,
                &cfg.required_cells,
                reward_node,
                &cfg.params,
                presentations + extra,
            )?;
            metrics.extinction = Some(extinction_report(&converged, &after, &cfg.params, extra));
        }

        metrics.final_readout = Some(grid_readout(
            net,
            &physics,
            &cfg.required_cells,
            reward_node,
            &cfg.params,
            presentations + cfg.extinction_presentations.filter(|_| metrics.extinction.is_some()).unwrap_or(0),
        )?);
        Ok(metrics)
    }
}

fn tally(metrics: &mut TrialMetrics, reward: &RewardSignal) {
    if reward.rewarded {
        metrics.reward_events += 1;
        match reward.source {
            RewardSource::ConditionedOutput => metrics.conditioned_rewards += 1,
            _ => metrics.primary_rewards += 1,
        }
    }
}

/// Compare motor outputs on the converged rollout paths before and after
/// extinction training. The reward node is left out: with no reward its target
/// is 0, so it settles at a mature low value by design.
fn extinction_report(
    before: &GridReadout,
    after: &GridReadout,
    params: &LearningParams,
    presentations: u64,
) -> ExtinctionReport {
    let path_cells: BTreeSet<usize> = before
        .rollouts
        .values()
        .flat_map(|r| r.path[..r.actions.len()].iter().copied())
        .collect();
    let mut previously_mature = 0;
    let mut still_mature = 0;
    for cell in path_cells {
        let (old, new) = (&before.outputs[&cell], &after.outputs[&cell]);
        for (a_old, a_new) in old.iter().zip(new).take(MOTOR_OUTPUTS) {
            if params.is_mature(*a_old) {
                previously_mature += 1;
                if params.is_mature(*a_new) {
                    still_mature += 1;
                }
            }
        }
    }
    let reached = after.rollouts.values().filter(|r| r.reached_goal).count();
    ExtinctionReport {
        presentations,
        success_rate: reached as f64 / after.rollouts.len().max(1) as f64,
        previously_mature,
        still_mature,
    }
}
