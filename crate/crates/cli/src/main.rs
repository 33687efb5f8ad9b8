//! `leocell` command-line tool.
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 numeric failure
//! (training divergence, rank-deficient fit).

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "leocell", version, about = "LEO Li-ion capacity and EODV degradation models")]
pub struct Cli {
    /// Key=value config file (simulation plan, model coefficients, training settings).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Seed for simulation noise, weight initialization and shuffling.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Directory for machine-readable outputs and the run manifest.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Suppress human-readable tables on standard output.
    #[arg(long, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic cycling dataset from the degradation model.
    Simulate(SimulateArgs),
    /// Fit a linear model by least squares.
    FitOls(FitOlsArgs),
    /// Train a neural network (or resume training from a weights file).
    Train(TrainArgs),
    /// Predict RC or EODV at one point or along a sweep.
    Predict(PredictArgs),
    /// Compare a model's predictions with observed data.
    Evaluate(EvaluateArgs),
    /// Cycle at which capacity or EODV first drops below its floor.
    CycleLife(CycleLifeArgs),
}

#[derive(Debug, Clone, Args, Default)]
pub struct GridArgs {
    /// Use the six reference (temperature, DOD) settings.
    #[arg(long)]
    pub default_grid: bool,

    /// A TEMP:DOD setting, repeatable; replaces the configured settings.
    #[arg(long = "setting", value_name = "TEMP:DOD")]
    pub settings: Vec<String>,

    #[arg(long)]
    pub cycle_start: Option<u32>,

    #[arg(long)]
    pub cycle_end: Option<u32>,

    #[arg(long)]
    pub cycle_step: Option<u32>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub grid: GridArgs,

    /// Noise SD applied to both RC (percent) and EODV (volts).
    #[arg(long)]
    pub noise: Option<f64>,

    /// RC noise SD in percent.
    #[arg(long)]
    pub noise_rc: Option<f64>,

    /// EODV noise SD in volts.
    #[arg(long)]
    pub noise_eodv: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FitOlsArgs {
    /// Dataset CSV.
    #[arg(long)]
    pub data: PathBuf,

    /// rc or eodv.
    #[arg(long)]
    pub target: String,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,

    #[arg(long)]
    pub target: String,

    /// Hidden layer sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,

    #[arg(long)]
    pub learning_rate: Option<f64>,

    #[arg(long)]
    pub momentum: Option<f64>,

    /// Stop at this training MAPE in percent (default 0.7 for rc, 0.2 for eodv).
    #[arg(long)]
    pub error_target: Option<f64>,

    #[arg(long)]
    pub max_epochs: Option<u64>,

    #[arg(long)]
    pub eval_every: Option<u64>,

    /// Shuffle pattern order every epoch.
    #[arg(long)]
    pub shuffle: bool,

    /// Lower bound of the scaled range.
    #[arg(long)]
    pub output_low: Option<f64>,

    /// Upper bound of the scaled range.
    #[arg(long)]
    pub output_high: Option<f64>,

    /// Train on the even-rank cycles of each setting only.
    #[arg(long)]
    pub even_only: bool,

    /// Continue training from this weights file.
    #[arg(long)]
    pub resume: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,

    /// Single query point.
    #[arg(long, value_name = "T,DOD,C", value_delimiter = ',')]
    pub at: Option<Vec<f64>>,

    /// Predict along cycles for every configured setting.
    #[arg(long)]
    pub sweep: bool,

    #[command(flatten)]
    pub grid: GridArgs,

    /// Allow queries outside the model's fitted input range.
    #[arg(long)]
    pub allow_extrapolation: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,

    #[arg(long)]
    pub data: PathBuf,

    /// absolute or percent.
    #[arg(long, default_value = "absolute")]
    pub ba_mode: String,

    /// `even-odd`: evaluate on the odd-rank cycles only.
    #[arg(long)]
    pub split: Option<String>,
}

#[derive(Debug, Args)]
pub struct CycleLifeArgs {
    #[arg(long)]
    pub temperature: f64,

    #[arg(long)]
    pub dod: f64,

    #[arg(long, default_value_t = leocell::simulate::RC_FAILURE_PCT)]
    pub rc_floor: f64,

    #[arg(long, default_value_t = leocell::simulate::EODV_FAILURE_V)]
    pub eodv_floor: f64,

    /// Last cycle considered.
    #[arg(long, default_value_t = 1_000_000)]
    pub horizon: u32,

    /// RC model file; scanned cycle by cycle together with --eodv-model.
    #[arg(long, requires = "eodv_model")]
    pub rc_model: Option<PathBuf>,

    #[arg(long, requires = "rc_model")]
    pub eodv_model: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(leocell::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(e) if e.is_numeric() => 2,
            CliError::Core(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<leocell::Error> for CliError {
    fn from(e: leocell::Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
