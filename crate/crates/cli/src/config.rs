//! Run configuration: built-in defaults, overridden by a key=value file,
//! overridden by command-line flags.

use std::path::Path;

use leocell::kv::KeyValues;
use leocell::{DegradationModelParams, SimulationPlan, Target, TrainingConfig};
use serde::Serialize;

use crate::{CliError, CliResult};

const TRAINING_KEYS: [&str; 9] = [
    "learning_rate",
    "momentum",
    "error_target_pct",
    "max_epochs",
    "eval_every",
    "shuffle",
    "hidden",
    "output_low",
    "output_high",
];

/// Error target used for EODV when neither the file nor a flag gives one.
pub const EODV_ERROR_TARGET_PCT: f64 = 0.2;

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub plan: SimulationPlan,
    pub params: DegradationModelParams,
    pub training: TrainingConfig,
    /// `None` until a flag or the config file sets it; the default then
    /// depends on the target.
    #[serde(skip)]
    pub error_target_pct: Option<f64>,
    pub hidden: Vec<usize>,
    pub output_low: f64,
    pub output_high: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            plan: SimulationPlan::default(),
            params: DegradationModelParams::default(),
            training: TrainingConfig::default(),
            error_target_pct: None,
            hidden: vec![9, 9],
            output_low: leocell::dataset::DEFAULT_OUTPUT_LOW,
            output_high: leocell::dataset::DEFAULT_OUTPUT_HIGH,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let mut config = Self::default();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!("cannot read config {}: {e}", path.display()))
            })?;
            config.apply_text(&text)?;
        }
        Ok(config)
    }

    pub fn apply_text(&mut self, text: &str) -> CliResult<()> {
        let kv = KeyValues::parse(text)?;
        for key in kv.keys() {
            let known = SimulationPlan::keys().contains(&key)
                || DegradationModelParams::keys().contains(&key)
                || ["knee_cycle", "knee_slope_multiplier"].contains(&key)
                || TRAINING_KEYS.contains(&key);
            if !known {
                return Err(CliError::Usage(format!("unknown config key `{key}`")));
            }
        }
        self.plan.apply_kv(&kv)?;
        self.params.apply_kv(&kv)?;
        let t = &mut self.training;
        if let Some(v) = kv.get("learning_rate")? {
            t.learning_rate = v;
        }
        if let Some(v) = kv.get("momentum")? {
            t.momentum = v;
        }
        if let Some(v) = kv.get("max_epochs")? {
            t.max_epochs = v;
        }
        if let Some(v) = kv.get("eval_every")? {
            t.eval_every = v;
        }
        if let Some(v) = kv.get("shuffle")? {
            t.shuffle_each_epoch = v;
        }
        if let Some(v) = kv.get("error_target_pct")? {
            self.error_target_pct = Some(v);
        }
        if let Some(v) = kv.get_list("hidden")? {
            self.hidden = v;
        }
        if let Some(v) = kv.get("output_low")? {
            self.output_low = v;
        }
        if let Some(v) = kv.get("output_high")? {
            self.output_high = v;
        }
        Ok(())
    }

    /// Seeds the plan and the training shuffle from one value.
    pub fn set_seed(&mut self, seed: u64) {
        self.plan.seed = seed;
        self.training.seed = seed;
    }

    pub fn seed(&self) -> u64 {
        self.plan.seed
    }

    /// Training settings with the target-dependent error default filled in.
    pub fn training_for(&self, target: Target) -> TrainingConfig {
        let mut t = self.training.clone();
        t.seed = self.plan.seed;
        t.error_target_pct = self.error_target_pct.unwrap_or(match target {
            Target::Rc => TrainingConfig::default().error_target_pct,
            Target::Eodv => EODV_ERROR_TARGET_PCT,
        });
        t
    }
}
