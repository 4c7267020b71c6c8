//! `trl`: run, sweep and inspect threshold-gated reinforcement learning experiments.
//!
//! Exit codes: 0 converged, 1 ran to the cap without converging, 2 bad
//! configuration, 3 file or I/O failure.

mod options;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use threshold_rl::harness::{multi_seed, summary_json, sweep_json, Experiment, TraceLevel};
use threshold_rl::persist::{load_weights, save_weights};
use threshold_rl::{Error, Network, Result};

use options::ExperimentArgs;

const EXIT_NOT_CONVERGED: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "trl", version, about = "Threshold-gated reinforcement learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train one network and report its metrics.
    Run {
        #[command(flatten)]
        experiment: ExperimentArgs,
        /// Write the trained weights here.
        #[arg(long)]
        save_weights: Option<PathBuf>,
        /// Start from these weights instead of a fresh initialisation.
        #[arg(long)]
        load_weights: Option<PathBuf>,
    },
    /// Run seeds `seed .. seed + seeds` in parallel and report aggregates.
    Sweep {
        #[command(flatten)]
        experiment: ExperimentArgs,
        #[arg(long)]
        seeds: Option<usize>,
    },
    /// Print the layout and weight statistics of a weight file.
    InspectWeights { path: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("trl: {err}");
            ExitCode::from(error_code(&err))
        }
    }
}

fn error_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) | Error::WeightFile { .. } => EXIT_IO,
        Error::Config(_) | Error::Shape { .. } | Error::Environment(_) => EXIT_CONFIG,
    }
}

fn converged_code(converged: bool) -> ExitCode {
    if converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_NOT_CONVERGED)
    }
}

fn dispatch(command: Command) -> Result<ExitCode> {
    match command {
        Command::Run {
            experiment,
            save_weights,
            load_weights,
        } => {
            let (experiment, extras) = experiment.merged()?;
            let extras = extras.unwrap_or_default();
            run(
                &experiment,
                save_weights.or(extras.save_weights).as_deref(),
                load_weights.or(extras.load_weights).as_deref(),
            )
        }
        Command::Sweep { experiment, seeds } => {
            let (experiment, extras) = experiment.merged()?;
            let seeds = seeds.or(extras.and_then(|e| e.seeds)).unwrap_or(10);
            sweep(&experiment, seeds)
        }
        Command::InspectWeights { path } => {
            let net = load_weights(&path).map_err(|e| with_path(e, &path))?;
            print!("{}", describe(&net));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn with_path(err: Error, path: &Path) -> Error {
    match err {
        Error::Io(msg) => Error::Io(format!("{}: {msg}", path.display())),
        Error::WeightFile { line, message } => Error::WeightFile {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn prepare_out(args: &ExperimentArgs) -> Result<Option<&Path>> {
    let out = args.out.as_deref();
    if args.trace_level()? != TraceLevel::Off && out.is_none() {
        return Err(Error::Config("--trace needs --out for the trace.jsonl file".into()));
    }
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    }
    Ok(out)
}

fn emit_summary(out: Option<&Path>, summary: &str) -> Result<()> {
    if let Some(dir) = out {
        let path = dir.join("summary.json");
        fs::write(&path, format!("{summary}\n")).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    let mut stdout = io::stdout().lock();
    writeln!(stdout, "{summary}")?;
    Ok(())
}

fn run(args: &ExperimentArgs, save: Option<&Path>, load: Option<&Path>) -> Result<ExitCode> {
    let cfg = args.to_config()?;
    let out = prepare_out(args)?;
    let network = load.map(|p| load_weights(p).map_err(|e| with_path(e, p))).transpose()?;

    let mut trace_sink = match out {
        Some(dir) if cfg.trace != TraceLevel::Off => Some(create(&dir.join("trace.jsonl"))?),
        _ => None,
    };
    let mut experiment = Experiment::new(&cfg);
    if let Some(net) = network {
        experiment = experiment.with_network(net);
    }
    if let Some(sink) = trace_sink.as_mut() {
        experiment = experiment.with_trace(sink);
    }
    let outcome = experiment.run()?;
    if let Some(mut sink) = trace_sink {
        sink.flush()?;
    }
    if let Some(path) = save {
        save_weights(&outcome.network, path).map_err(|e| with_path(e, path))?;
    }
    emit_summary(out, &summary_json(&cfg, &outcome.metrics))?;
    Ok(converged_code(outcome.metrics.converged))
}

fn sweep(args: &ExperimentArgs, seeds: usize) -> Result<ExitCode> {
    let cfg = args.to_config()?;
    if cfg.trace != TraceLevel::Off {
        return Err(Error::Config("tracing is per run; use `run` with --trace".into()));
    }
    let out = prepare_out(args)?;
    let report = multi_seed(&cfg, seeds)?;
    emit_summary(out, &sweep_json(&cfg, &report))?;
    Ok(converged_code(report.converged == report.n_seeds))
}

fn describe(net: &Network) -> String {
    let mut text = format!(
        "layers {:?}\nparameters {} ({} connections, {} biases)\n",
        net.layer_sizes(),
        net.parameter_count(),
        net.connection_count(),
        net.bias_count()
    );
    for (l, (w, b)) in net.weights().iter().zip(net.biases()).enumerate() {
        let values = w.as_slice();
        text.push_str(&format!(
            "layer {} <- {}: weights {}\n  bias {}\n",
            l + 1,
            l,
            stats(values),
            stats(b)
        ));
    }
    for (l, th) in net.thresholds().iter().enumerate() {
        text.push_str(&format!("thresholds {l} {th:?}\n"));
    }
    text
}

fn stats(values: &[f64]) -> String {
    if values.is_empty() {
        return "n=0".into();
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    format!("n={} min={min:.6} max={max:.6} mean={mean:.6}", values.len())
}
