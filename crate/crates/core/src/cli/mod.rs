//! Command-line entry point: `bench`, `train-identity` and `quanv-demo`,
//! each driven by one JSON config file.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |---|---|
//! | 0 | success |
//! | 1 | the pipeline failed at runtime |
//! | 2 | the config file is malformed or invalid |
//! | 64 | bad command line |
//! | 66 | the config file cannot be read |
//! | 74 | an output file cannot be written |

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::bench::{emit_report, run_bench, BenchConfig, ReportFormat};
use crate::error::Error;
use crate::model::{Init, ModelRegistry, ModelSpec};
use crate::optim::{train_identity_with, TrainConfig};
use crate::quanv::{run_quanv_demo, QuanvDemoConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_RUNTIME: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_USAGE: u8 = 64;
pub const EXIT_NO_INPUT: u8 = 66;
pub const EXIT_OUTPUT: u8 = 74;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Bench,
    TrainIdentity,
    QuanvDemo,
}

/// A validated command line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunManifest {
    pub command: Command,
    pub config_path: PathBuf,
    pub output_dir: PathBuf,
    pub seed_override: Option<u64>,
}

#[derive(Parser, Debug)]
#[command(name = "unitary-forge", version, about = "Train quantum circuits as elements of the unitary group")]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    /// JSON config file.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Directory for reports; created if missing.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Replaces the seed in the config.
    #[arg(long, value_name = "INT")]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum CliCommand {
    /// Time identity-learning epochs across qubit counts, batch sizes and models.
    Bench(RunArgs),
    /// Train one model on the identity task.
    TrainIdentity(RunArgs),
    /// Train a quanvolutional classifier on image data.
    QuanvDemo(RunArgs),
}

/// Parses `argv` (program name first). Help and version requests come back
/// as errors too; [`clap::Error::exit_code`] tells them apart.
pub fn parse_args<I, T>(argv: I) -> Result<RunManifest, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    let (command, args) = match cli.command {
        CliCommand::Bench(a) => (Command::Bench, a),
        CliCommand::TrainIdentity(a) => (Command::TrainIdentity, a),
        CliCommand::QuanvDemo(a) => (Command::QuanvDemo, a),
    };
    for (flag, path) in [("--config", &args.config), ("--out", &args.out)] {
        if path.as_os_str().is_empty() {
            return Err(clap::Error::raw(
                clap::error::ErrorKind::InvalidValue,
                format!("{flag} must not be empty\n"),
            ));
        }
    }
    Ok(RunManifest {
        command,
        config_path: args.config,
        output_dir: args.out,
        seed_override: args.seed,
    })
}

/// Model settings for `train-identity` besides the kind, which comes from
/// the train config.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelOptions {
    pub init: Init,
    pub group_size: Option<usize>,
    pub layers: Option<usize>,
    pub n_params: Option<usize>,
}

/// Config file of `train-identity`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainIdentityConfig {
    pub n_qubits: usize,
    pub dataset_size: usize,
    pub train: TrainConfig,
    pub model: ModelOptions,
}

impl Default for TrainIdentityConfig {
    fn default() -> Self {
        TrainIdentityConfig {
            n_qubits: 4,
            dataset_size: 32,
            train: TrainConfig::default(),
            model: ModelOptions::default(),
        }
    }
}

impl TrainIdentityConfig {
    pub fn model_spec(&self) -> ModelSpec {
        ModelSpec {
            kind: self.train.model_kind.clone(),
            n_qubits: self.n_qubits,
            init: self.model.init,
            group_size: self.model.group_size,
            layers: self.model.layers,
            n_params: self.model.n_params,
        }
    }
}

/// Failure of one CLI run, mapped to an exit code.
#[derive(Debug)]
pub enum RunError {
    NoInput(PathBuf, io::Error),
    Config(String),
    Runtime(Error),
    Output(PathBuf, io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::NoInput(..) => EXIT_NO_INPUT,
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Runtime(_) => EXIT_RUNTIME,
            RunError::Output(..) => EXIT_OUTPUT,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::NoInput(p, e) => write!(f, "cannot read config {}: {e}", p.display()),
            RunError::Config(msg) => write!(f, "bad config: {msg}"),
            RunError::Runtime(e) => write!(f, "run failed: {e}"),
            RunError::Output(p, e) => write!(f, "cannot write {}: {e}", p.display()),
        }
    }
}

/// Runtime errors that really describe a bad config are reported as such.
fn classify(e: Error) -> RunError {
    match e {
        Error::Config(msg) => RunError::Config(msg),
        Error::UnknownModel(kind) => RunError::Config(format!("unknown model kind `{kind}`")),
        other => RunError::Runtime(other),
    }
}

fn load_config<T: DeserializeOwned>(path: &Path) -> Result<T, RunError> {
    let text = fs::read_to_string(path).map_err(|e| RunError::NoInput(path.to_path_buf(), e))?;
    serde_json::from_str(&text).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))
}

struct Outputs<'a> {
    dir: &'a Path,
    written: Vec<PathBuf>,
}

impl<'a> Outputs<'a> {
    fn new(dir: &'a Path) -> Result<Self, RunError> {
        fs::create_dir_all(dir).map_err(|e| RunError::Output(dir.to_path_buf(), e))?;
        Ok(Outputs {
            dir,
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &[u8]) -> Result<(), RunError> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| RunError::Output(path.clone(), e))?;
        self.written.push(path);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), RunError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| RunError::Runtime(e.into()))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }
}

/// Runs the pipeline selected by `m`; returns the files written.
pub fn execute(m: &RunManifest) -> Result<Vec<PathBuf>, RunError> {
    let registry = ModelRegistry::with_defaults();
    match m.command {
        Command::Bench => {
            let mut cfg: BenchConfig = load_config(&m.config_path)?;
            if let Some(seed) = m.seed_override {
                cfg.seed = seed;
            }
            cfg.validate(&registry).map_err(classify)?;
            let report = run_bench(&cfg, &registry).map_err(classify)?;
            let mut out = Outputs::new(&m.output_dir)?;
            for format in ReportFormat::ALL {
                let name = format!("report.{}", format.extension());
                out.write(&name, emit_report(&report, format).as_bytes())?;
            }
            Ok(out.written)
        }
        Command::TrainIdentity => {
            let mut cfg: TrainIdentityConfig = load_config(&m.config_path)?;
            if let Some(seed) = m.seed_override {
                cfg.train.seed = seed;
            }
            cfg.train.validate().map_err(classify)?;
            let report =
                train_identity_with(&cfg.train, &cfg.model_spec(), cfg.dataset_size, &registry).map_err(classify)?;
            let mut out = Outputs::new(&m.output_dir)?;
            out.json("train_report.json", &report)?;
            let mut curve = Vec::new();
            report.write_csv(&mut curve).map_err(RunError::Runtime)?;
            out.write("loss_curve.csv", &curve)?;
            out.json("checkpoint.json", &report.final_params)?;
            Ok(out.written)
        }
        Command::QuanvDemo => {
            let mut cfg: QuanvDemoConfig = load_config(&m.config_path)?;
            if let Some(seed) = m.seed_override {
                cfg.train.seed = seed;
            }
            cfg.train.validate().map_err(classify)?;
            let (report, model) = run_quanv_demo(&cfg).map_err(classify)?;
            let mut out = Outputs::new(&m.output_dir)?;
            out.json("quanv_report.json", &report)?;
            let mut curve = String::from("epoch,accuracy,loss,seconds\n");
            for (e, ((a, l), s)) in report
                .accuracy_curve
                .iter()
                .zip(&report.loss_curve)
                .zip(&report.epoch_times)
                .enumerate()
            {
                curve.push_str(&format!("{e},{a},{l:e},{s:e}\n"));
            }
            out.write("accuracy_curve.csv", curve.as_bytes())?;
            out.json("checkpoint.json", &model)?;
            Ok(out.written)
        }
    }
}

/// Full CLI run over `argv`; returns the process exit code.
pub fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let manifest = match parse_args(argv) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&manifest) {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
