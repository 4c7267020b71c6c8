use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;
use threshold_rl::harness::TraceLevel;
use threshold_rl::{Algorithm, Error, ExperimentConfig, PunishRange, Result, Task};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RangeArg {
    Narrow,
    Full,
}

impl From<RangeArg> for PunishRange {
    fn from(r: RangeArg) -> Self {
        match r {
            RangeArg::Narrow => PunishRange::Narrow,
            RangeArg::Full => PunishRange::Full,
        }
    }
}

/// Experiment settings shared by `run` and `sweep`. Every field may also come
/// from a `--config` file; flags on the command line win.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ExperimentArgs {
    /// Flat TOML file whose keys are these flag names without the dashes.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// tracking | maze | xor
    #[arg(long)]
    pub task: Option<String>,

    /// supervised | tap | tar | tac
    #[arg(long)]
    pub algo: Option<String>,

    #[arg(long)]
    pub seed: Option<u64>,

    #[arg(long)]
    pub lrate: Option<f64>,

    #[arg(long)]
    pub gamma: Option<f64>,

    /// Reward-node activation above which a conditioned reward fires.
    #[arg(long)]
    pub reward_threshold: Option<f64>,

    #[arg(long, value_enum)]
    pub punish_range: Option<RangeArg>,

    #[arg(long)]
    pub max_presentations: Option<u64>,

    /// Initial weights are drawn from [-w, w].
    #[arg(long)]
    pub init_half_width: Option<f64>,

    /// After grid convergence, train this many presentations without the primary reward.
    #[arg(long)]
    pub extinction: Option<u64>,

    /// off | rewards | steps
    #[arg(long)]
    pub trace: Option<String>,

    /// Directory for summary.json and trace.jsonl.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl ExperimentArgs {
    /// Fill unset flags from the config file, if one was given.
    pub fn merged(self) -> Result<(Self, Option<FileExtras>)> {
        let Some(path) = self.config.clone() else {
            return Ok((self, None));
        };
        let file = read_config(&path)?;
        let base = file.experiment;
        let merged = ExperimentArgs {
            config: self.config,
            task: self.task.or(base.task),
            algo: self.algo.or(base.algo),
            seed: self.seed.or(base.seed),
            lrate: self.lrate.or(base.lrate),
            gamma: self.gamma.or(base.gamma),
            reward_threshold: self.reward_threshold.or(base.reward_threshold),
            punish_range: self.punish_range.or(base.punish_range),
            max_presentations: self.max_presentations.or(base.max_presentations),
            init_half_width: self.init_half_width.or(base.init_half_width),
            extinction: self.extinction.or(base.extinction),
            trace: self.trace.or(base.trace),
            out: self.out.or(base.out),
        };
        Ok((merged, Some(file.extras)))
    }

    pub fn trace_level(&self) -> Result<TraceLevel> {
        self.trace.as_deref().map_or(Ok(TraceLevel::Off), str::parse)
    }

    /// Start from the task/algorithm preset and apply every override.
    pub fn to_config(&self) -> Result<ExperimentConfig> {
        let task: Task = self
            .task
            .as_deref()
            .ok_or_else(|| Error::Config("--task is required".into()))?
            .parse()?;
        let algo: Algorithm = self
            .algo
            .as_deref()
            .ok_or_else(|| Error::Config("--algo is required".into()))?
            .parse()?;
        let mut cfg = ExperimentConfig::preset(task, algo)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(range) = self.punish_range {
            cfg.params = cfg.params.with_punish_range(range.into());
        }
        if let Some(v) = self.lrate {
            cfg.params.lrate = v;
        }
        if let Some(v) = self.gamma {
            cfg.params.gamma = v;
        }
        if let Some(v) = self.reward_threshold {
            cfg.params.reward_threshold_out = v;
        }
        if let Some(v) = self.max_presentations {
            cfg.max_presentations = v;
        }
        if let Some(v) = self.init_half_width {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("init half-width must be non-negative, got {v}")));
            }
            cfg.init_half_width = v;
        }
        if let Some(v) = self.extinction {
            if task == Task::Xor {
                return Err(Error::Config("extinction applies to grid tasks only".into()));
            }
            cfg.extinction_presentations = Some(v);
        }
        cfg.trace = self.trace_level()?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Keys a config file may carry beyond the shared experiment settings.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileExtras {
    pub seeds: Option<usize>,
    pub save_weights: Option<PathBuf>,
    pub load_weights: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
struct ConfigFile {
    #[serde(flatten)]
    experiment: ExperimentArgs,
    #[serde(flatten)]
    extras: FileExtras,
}

fn read_config(path: &Path) -> Result<ConfigFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn parse_config(text: &str) -> Result<ConfigFile> {
    // Flattened structs cannot deny unknown fields, so check keys by hand.
    let table: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    for key in table.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!("unknown config key `{key}`")));
        }
    }
    ConfigFile::deserialize(table).map_err(|e| Error::Config(e.to_string()))
}

const KNOWN_KEYS: &[&str] = &[
    "task",
    "algo",
    "seed",
    "lrate",
    "gamma",
    "reward-threshold",
    "punish-range",
    "max-presentations",
    "init-half-width",
    "extinction",
    "trace",
    "out",
    "seeds",
    "save-weights",
    "load-weights",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_keys_parse() {
        let file = parse_config(
            "task = \"maze\"\nalgo = \"tac\"\nseed = 4\npunish-range = \"full\"\nseeds = 3\nsave-weights = \"w.txt\"\n",
        )
        .unwrap();
        assert_eq!(file.experiment.task.as_deref(), Some("maze"));
        assert_eq!(file.experiment.seed, Some(4));
        assert_eq!(file.experiment.punish_range, Some(RangeArg::Full));
        assert_eq!(file.extras.seeds, Some(3));
        assert_eq!(file.extras.save_weights, Some(PathBuf::from("w.txt")));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(parse_config("tsk = \"maze\""), Err(Error::Config(_))));
    }

    #[test]
    fn overrides_reach_the_config() {
        let args = ExperimentArgs {
            task: Some("xor".into()),
            algo: Some("tap".into()),
            seed: Some(9),
            lrate: Some(0.5),
            punish_range: Some(RangeArg::Full),
            max_presentations: Some(77),
            ..Default::default()
        };
        let cfg = args.to_config().unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.params.lrate, 0.5);
        assert_eq!((cfg.params.punish_low, cfg.params.punish_high), (0.0, 1.0));
        assert_eq!(cfg.max_presentations, 77);
    }

    #[test]
    fn missing_task_is_a_config_error() {
        let args = ExperimentArgs {
            algo: Some("tap".into()),
            ..Default::default()
        };
        assert!(matches!(args.to_config(), Err(Error::Config(_))));
    }
}
