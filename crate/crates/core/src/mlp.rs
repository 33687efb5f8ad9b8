//! Feed-forward sigmoid network trained by online backpropagation.
//!
//! Inputs `(T, DOD, C)` and the single target are min-max scaled with the
//! model's [`NormalizationSpec`]; every layer, the output layer included,
//! computes `sigmoid(W a + b)`. Training minimizes the per-pattern loss
//! `0.5 * (target - output)^2` on scaled values, updating after every
//! pattern, and stops once the training-set MAPE (in target units) reaches
//! the configured error target.
//!
//! Parameters are ordered layer by layer, each layer's weights row-major
//! (`to x from`) followed by its biases. Initialization draws every
//! parameter in that order from `U[-0.5, 0.5)` using
//! [`SplitMix64`](crate::rng::SplitMix64) seeded with the model seed.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{CyclingDataset, CyclingRecord, NormalizationSpec, Range, Target, Variable};
use crate::error::{Error, Result};
use crate::kv::{KeyValues, KvWriter};
use crate::rng::SplitMix64;

pub const MLP_SCHEMA_VERSION: u32 = 1;
pub const INIT_HALF_WIDTH: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Sigmoid,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Sigmoid => 1.0 / (1.0 + (-x).exp()),
        }
    }

    /// Derivative expressed through the activation's output.
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Sigmoid => y * (1.0 - y),
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("sigmoid")
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sigmoid" => Ok(Activation::Sigmoid),
            _ => Err(Error::Invalid(format!("unknown activation `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkTopology {
    layer_sizes: Vec<usize>,
    activation: Activation,
}

impl Default for NetworkTopology {
    /// 3 inputs, two hidden layers of 9, one output.
    fn default() -> Self {
        Self {
            layer_sizes: vec![3, 9, 9, 1],
            activation: Activation::Sigmoid,
        }
    }
}

impl NetworkTopology {
    pub fn new(layer_sizes: Vec<usize>, activation: Activation) -> Result<Self> {
        if layer_sizes.len() < 3 {
            return Err(Error::Invalid(format!(
                "topology {layer_sizes:?} needs at least one hidden layer"
            )));
        }
        if layer_sizes[0] != 3 {
            return Err(Error::Invalid(format!(
                "input layer must have 3 neurons (T, DOD, C), got {}",
                layer_sizes[0]
            )));
        }
        if *layer_sizes.last().unwrap() != 1 {
            return Err(Error::Invalid(format!(
                "output layer must have 1 neuron, got {}",
                layer_sizes.last().unwrap()
            )));
        }
        if layer_sizes.contains(&0) {
            return Err(Error::Invalid("layer sizes must be positive".into()));
        }
        Ok(Self {
            layer_sizes,
            activation,
        })
    }

    /// Hidden layer sizes between the fixed 3-neuron input and 1-neuron
    /// output.
    pub fn with_hidden(hidden: &[usize]) -> Result<Self> {
        let mut sizes = vec![3];
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        Self::new(sizes, Activation::Sigmoid)
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn parameter_count(&self) -> usize {
        self.layer_sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }
}

/// Weights `outputs x inputs`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
        }
    }

    pub fn weight(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.inputs + col]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub topology: NetworkTopology,
    pub layers: Vec<Layer>,
    pub normalization: NormalizationSpec,
    pub target: Target,
    pub epochs_trained: u64,
    pub seed: u64,
    pub learning_rate: f64,
}

/// Forward pass result: prediction in target units plus every layer's
/// activation, starting with the scaled inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Forward {
    pub prediction: f64,
    pub activations: Vec<Vec<f64>>,
}

impl MlpModel {
    /// Seeded uniform initialization in `[-0.5, 0.5)`.
    pub fn init(
        topology: NetworkTopology,
        seed: u64,
        normalization: NormalizationSpec,
        target: Target,
    ) -> Result<Self> {
        normalization.validate()?;
        let mut rng = SplitMix64::new(seed);
        let layers = topology
            .layer_sizes
            .windows(2)
            .map(|w| {
                let mut layer = Layer::zeros(w[0], w[1]);
                for x in layer.weights.iter_mut().chain(layer.biases.iter_mut()) {
                    *x = rng.uniform(-INIT_HALF_WIDTH, INIT_HALF_WIDTH);
                }
                layer
            })
            .collect();
        Ok(Self {
            topology,
            layers,
            normalization,
            target,
            epochs_trained: 0,
            seed,
            learning_rate: TrainingConfig::default().learning_rate,
        })
    }

    /// All weights and biases zero; every neuron outputs 0.5.
    pub fn zeros(
        topology: NetworkTopology,
        normalization: NormalizationSpec,
        target: Target,
    ) -> Result<Self> {
        normalization.validate()?;
        let layers = topology
            .layer_sizes
            .windows(2)
            .map(|w| Layer::zeros(w[0], w[1]))
            .collect();
        Ok(Self {
            topology,
            layers,
            normalization,
            target,
            epochs_trained: 0,
            seed: 0,
            learning_rate: TrainingConfig::default().learning_rate,
        })
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    /// Flattened parameters in the documented order.
    pub fn parameters(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.biases).copied())
            .collect()
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.parameter_count() {
            return Err(Error::Invalid(format!(
                "expected {} parameters, got {}",
                self.parameter_count(),
                params.len()
            )));
        }
        let mut it = params.iter();
        for l in &mut self.layers {
            for x in l.weights.iter_mut().chain(l.biases.iter_mut()) {
                *x = *it.next().unwrap();
            }
        }
        Ok(())
    }

    fn scaled_inputs(&self, temperature_c: f64, dod_pct: f64, cycle: f64) -> [f64; 3] {
        self.normalization.normalize_inputs(temperature_c, dod_pct, cycle)
    }

    pub fn forward(&self, temperature_c: f64, dod_pct: f64, cycle: f64) -> Forward {
        let x = self.scaled_inputs(temperature_c, dod_pct, cycle);
        let mut acts = self.activation_buffers();
        self.forward_into(&x, &mut acts);
        let out = acts.last().unwrap()[0];
        Forward {
            prediction: self.normalization.denormalize(out, Variable::Target),
            activations: acts,
        }
    }

    pub fn predict(&self, temperature_c: f64, dod_pct: f64, cycle: f64) -> f64 {
        self.forward(temperature_c, dod_pct, cycle).prediction
    }

    /// Open interval of values the output layer can map to.
    pub fn prediction_bounds(&self) -> (f64, f64) {
        self.normalization.prediction_bounds()
    }

    fn activation_buffers(&self) -> Vec<Vec<f64>> {
        self.topology.layer_sizes.iter().map(|&n| vec![0.0; n]).collect()
    }

    fn forward_into(&self, x: &[f64], acts: &mut [Vec<f64>]) {
        acts[0].copy_from_slice(x);
        let act = self.topology.activation;
        for (l, layer) in self.layers.iter().enumerate() {
            let (prev, next) = acts.split_at_mut(l + 1);
            let input = &prev[l];
            let output = &mut next[0];
            for (i, out) in output.iter_mut().enumerate() {
                let row = &layer.weights[i * layer.inputs..(i + 1) * layer.inputs];
                let z = layer.biases[i] + row.iter().zip(input).map(|(w, a)| w * a).sum::<f64>();
                *out = act.apply(z);
            }
        }
    }

    /// Fills `deltas[l]` with dLoss/dz for layer `l` given activations from
    /// [`forward_into`]. Returns the pattern loss.
    fn backward_into(&self, acts: &[Vec<f64>], target: f64, deltas: &mut [Vec<f64>]) -> f64 {
        let act = self.topology.activation;
        let last = self.layers.len() - 1;
        let y = acts[last + 1][0];
        let err = y - target;
        deltas[last][0] = err * act.derivative_from_output(y);
        for l in (0..last).rev() {
            let (head, tail) = deltas.split_at_mut(l + 1);
            let upper = &self.layers[l + 1];
            let upper_delta = &tail[0];
            for (j, d) in head[l].iter_mut().enumerate() {
                let back: f64 = (0..upper.outputs)
                    .map(|i| upper.weights[i * upper.inputs + j] * upper_delta[i])
                    .sum();
                *d = back * act.derivative_from_output(acts[l + 1][j]);
            }
        }
        0.5 * err * err
    }

    fn delta_buffers(&self) -> Vec<Vec<f64>> {
        self.layers.iter().map(|l| vec![0.0; l.outputs]).collect()
    }

    fn scaled_pattern(&self, record: &CyclingRecord) -> Result<([f64; 3], f64)> {
        let y = record.target(self.target).ok_or(Error::MissingTarget {
            target: self.target.column().to_string(),
            index: 0,
        })?;
        let x = self.scaled_inputs(record.temperature_c, record.dod_pct, record.cycle as f64);
        Ok((x, self.normalization.normalize(y, Variable::Target)))
    }

    /// Pattern loss on scaled values and its gradient with respect to every
    /// parameter, in parameter order.
    pub fn loss_and_gradient(&self, record: &CyclingRecord) -> Result<(f64, Vec<f64>)> {
        let (x, t) = self.scaled_pattern(record)?;
        let mut acts = self.activation_buffers();
        let mut deltas = self.delta_buffers();
        self.forward_into(&x, &mut acts);
        let loss = self.backward_into(&acts, t, &mut deltas);
        let mut grad = Vec::with_capacity(self.parameter_count());
        for (l, layer) in self.layers.iter().enumerate() {
            for i in 0..layer.outputs {
                for j in 0..layer.inputs {
                    grad.push(deltas[l][i] * acts[l][j]);
                }
            }
            grad.extend_from_slice(&deltas[l]);
        }
        Ok((loss, grad))
    }

    pub fn loss(&self, record: &CyclingRecord) -> Result<f64> {
        let (x, t) = self.scaled_pattern(record)?;
        let mut acts = self.activation_buffers();
        self.forward_into(&x, &mut acts);
        let e = acts.last().unwrap()[0] - t;
        Ok(0.5 * e * e)
    }

    /// Worst relative disagreement between backprop gradients and central
    /// finite differences over all parameters.
    pub fn gradient_check(&self, record: &CyclingRecord, epsilon: f64) -> Result<f64> {
        if !(epsilon > 0.0 && epsilon <= 1e-2) {
            return Err(Error::Invalid(format!(
                "epsilon must lie in (0, 1e-2], got {epsilon}"
            )));
        }
        let (_, analytic) = self.loss_and_gradient(record)?;
        let base = self.parameters();
        let mut probe = self.clone();
        let mut worst: f64 = 0.0;
        let mut params = base.clone();
        for (k, a) in analytic.iter().enumerate() {
            params[k] = base[k] + epsilon;
            probe.set_parameters(&params)?;
            let plus = probe.loss(record)?;
            params[k] = base[k] - epsilon;
            probe.set_parameters(&params)?;
            let minus = probe.loss(record)?;
            params[k] = base[k];
            let numeric = (plus - minus) / (2.0 * epsilon);
            let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-12);
            worst = worst.max(rel);
        }
        Ok(worst)
    }

    /// Mean absolute percentage error over `dataset` in target units.
    pub fn mape(&self, dataset: &CyclingDataset) -> Result<f64> {
        let ys = dataset.target_values(self.target)?;
        let mut acts = self.activation_buffers();
        let mut total = 0.0;
        for (index, (r, y)) in dataset.records().iter().zip(&ys).enumerate() {
            if *y == 0.0 {
                return Err(Error::ZeroObserved { index });
            }
            let x = self.scaled_inputs(r.temperature_c, r.dod_pct, r.cycle as f64);
            self.forward_into(&x, &mut acts);
            let pred = self
                .normalization
                .denormalize(acts.last().unwrap()[0], Variable::Target);
            total += ((y - pred) / y).abs();
        }
        Ok(100.0 * total / ys.len() as f64)
    }

    /// Fails unless every record carries this model's target and lies
    /// inside the ranges the normalization was fitted on.
    pub fn check_compatible(&self, dataset: &CyclingDataset) -> Result<()> {
        let norm = &self.normalization;
        for (index, r) in dataset.records().iter().enumerate() {
            let Some(y) = r.target(self.target) else {
                return Err(Error::Mismatch(format!(
                    "model predicts {} but record {index} has no {} value",
                    self.target,
                    self.target.column()
                )));
            };
            let checks = [
                (Variable::Temperature, r.temperature_c),
                (Variable::Dod, r.dod_pct),
                (Variable::Cycle, r.cycle as f64),
                (Variable::Target, y),
            ];
            for (var, v) in checks {
                if !norm.range(var).contains(v) {
                    let Range { min, max } = norm.range(var);
                    return Err(Error::Mismatch(format!(
                        "record {index}: {} = {v} is outside the model's normalization range [{min}, {max}]",
                        if var == Variable::Target { self.target.column() } else { var.name() }
                    )));
                }
            }
        }
        Ok(())
    }

    /// Online backpropagation until the training MAPE reaches
    /// `config.error_target_pct` or `config.max_epochs` passes have run.
    ///
    /// Returns the trained copy; `self` is untouched, so a divergence error
    /// never leaves a half-trained model behind.
    pub fn train(
        &self,
        dataset: &CyclingDataset,
        config: &TrainingConfig,
    ) -> Result<(MlpModel, TrainingReport)> {
        config.validate()?;
        if dataset.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        self.check_compatible(dataset)?;
        let patterns: Vec<([f64; 3], f64)> = dataset
            .records()
            .iter()
            .map(|r| self.scaled_pattern(r))
            .collect::<Result<_>>()?;

        let mut model = self.clone();
        model.learning_rate = config.learning_rate;
        let mut history = Vec::new();
        let initial = model.mape(dataset)?;
        history.push((0, initial));
        if initial <= config.error_target_pct {
            return Ok((
                model,
                TrainingReport {
                    epochs_run: 0,
                    final_train_mape_pct: initial,
                    error_history: history,
                    converged: true,
                },
            ));
        }

        let mut order: Vec<usize> = (0..patterns.len()).collect();
        let mut shuffler = SplitMix64::new(config.seed);
        let mut velocity: Vec<Layer> = model
            .layers
            .iter()
            .map(|l| Layer::zeros(l.inputs, l.outputs))
            .collect();
        let mut acts = model.activation_buffers();
        let mut deltas = model.delta_buffers();
        let lr = config.learning_rate;
        let mu = config.momentum;

        let mut epochs_run = 0;
        let mut last_mape = initial;
        let mut converged = false;
        for epoch in 1..=config.max_epochs {
            if config.shuffle_each_epoch {
                shuffler.shuffle(&mut order);
            }
            let mut epoch_loss = 0.0;
            for &p in &order {
                let (x, t) = &patterns[p];
                model.forward_into(x, &mut acts);
                epoch_loss += model.backward_into(&acts, *t, &mut deltas);
                for (l, (layer, vel)) in model.layers.iter_mut().zip(&mut velocity).enumerate() {
                    let input = &acts[l];
                    for i in 0..layer.outputs {
                        let d = deltas[l][i];
                        let row = i * layer.inputs;
                        for j in 0..layer.inputs {
                            let step = mu * vel.weights[row + j] - lr * d * input[j];
                            vel.weights[row + j] = step;
                            layer.weights[row + j] += step;
                        }
                        let step = mu * vel.biases[i] - lr * d;
                        vel.biases[i] = step;
                        layer.biases[i] += step;
                    }
                }
            }
            epochs_run = epoch;
            if !epoch_loss.is_finite() {
                return Err(Error::Divergence {
                    epoch: self.epochs_trained + epoch,
                });
            }
            if epoch % config.eval_every == 0 || epoch == config.max_epochs {
                last_mape = model.mape(dataset)?;
                if !last_mape.is_finite() {
                    return Err(Error::Divergence {
                        epoch: self.epochs_trained + epoch,
                    });
                }
                history.push((epoch, last_mape));
                if last_mape <= config.error_target_pct {
                    converged = true;
                    break;
                }
            }
        }
        model.epochs_trained += epochs_run;
        Ok((
            model,
            TrainingReport {
                epochs_run,
                final_train_mape_pct: last_mape,
                error_history: history,
                converged,
            },
        ))
    }

    /// Loads a weights file and continues training it on `dataset`.
    pub fn resume_train(
        path: impl AsRef<Path>,
        dataset: &CyclingDataset,
        config: &TrainingConfig,
    ) -> Result<(MlpModel, TrainingReport)> {
        let model = MlpModel::load(path)?;
        model.train(dataset, config)
    }

    pub fn to_kv_string(&self) -> String {
        let n = &self.normalization;
        let mut w = KvWriter::new();
        w.comment("feed-forward network weights and biases")
            .entry("schema_version", MLP_SCHEMA_VERSION)
            .entry("kind", "mlp")
            .entry("target", self.target)
            .entry(
                "layer_sizes",
                self.topology
                    .layer_sizes
                    .iter()
                    .map(usize::to_string)
                    .collect::<Vec<_>>()
                    .join(" "),
            )
            .entry("activation", self.topology.activation)
            .num("learning_rate", self.learning_rate)
            .entry("epochs_trained", self.epochs_trained)
            .entry("seed", self.seed)
            .num("norm.output_low", n.output_low)
            .num("norm.output_high", n.output_high)
            .nums("norm.temperature_c", &[n.temperature_c.min, n.temperature_c.max])
            .nums("norm.dod_pct", &[n.dod_pct.min, n.dod_pct.max])
            .nums("norm.cycle", &[n.cycle.min, n.cycle.max])
            .nums("norm.target", &[n.target.min, n.target.max]);
        for (l, layer) in self.layers.iter().enumerate() {
            w.nums(&format!("weights.{l}"), &layer.weights)
                .nums(&format!("biases.{l}"), &layer.biases);
        }
        w.finish()
    }

    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        let version: u32 = kv.require("schema_version")?;
        if version != MLP_SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: version,
                expected: MLP_SCHEMA_VERSION,
            });
        }
        match kv.get_str("kind") {
            Some("mlp") => {}
            other => {
                return Err(Error::Invalid(format!(
                    "expected kind=mlp, got {}",
                    other.unwrap_or("<none>")
                )))
            }
        }
        let target: Target = kv.require::<String>("target")?.parse()?;
        let activation: Activation = kv.require::<String>("activation")?.parse()?;
        let topology = NetworkTopology::new(kv.require_list("layer_sizes")?, activation)?;
        let range = |key: &str| -> Result<Range> {
            let v: Vec<f64> = kv.require_list(key)?;
            if v.len() != 2 {
                return Err(Error::Invalid(format!("{key} needs two numbers")));
            }
            Ok(Range::new(v[0], v[1]))
        };
        let normalization = NormalizationSpec::new(
            range("norm.temperature_c")?,
            range("norm.dod_pct")?,
            range("norm.cycle")?,
            range("norm.target")?,
            kv.require("norm.output_low")?,
            kv.require("norm.output_high")?,
        )?;
        let mut layers = Vec::new();
        for (l, w) in topology.layer_sizes.windows(2).enumerate() {
            let weights: Vec<f64> = kv.require_list(&format!("weights.{l}"))?;
            let biases: Vec<f64> = kv.require_list(&format!("biases.{l}"))?;
            if weights.len() != w[0] * w[1] {
                return Err(Error::Shape {
                    layer: l,
                    message: format!(
                        "expected {}x{} = {} weights, found {}",
                        w[1],
                        w[0],
                        w[0] * w[1],
                        weights.len()
                    ),
                });
            }
            if biases.len() != w[1] {
                return Err(Error::Shape {
                    layer: l,
                    message: format!("expected {} biases, found {}", w[1], biases.len()),
                });
            }
            if weights.iter().chain(&biases).any(|x| !x.is_finite()) {
                return Err(Error::Shape {
                    layer: l,
                    message: "non-finite parameter".into(),
                });
            }
            layers.push(Layer {
                inputs: w[0],
                outputs: w[1],
                weights,
                biases,
            });
        }
        let extra = kv
            .keys()
            .filter_map(|k| k.strip_prefix("weights.").or_else(|| k.strip_prefix("biases.")))
            .filter_map(|i| i.parse::<usize>().ok())
            .find(|&i| i >= layers.len());
        if let Some(layer) = extra {
            return Err(Error::Shape {
                layer,
                message: format!("topology has only {} layers", layers.len()),
            });
        }
        let learning_rate: f64 = kv.require("learning_rate")?;
        Ok(Self {
            topology,
            layers,
            normalization,
            target,
            epochs_trained: kv.require("epochs_trained")?,
            seed: kv.require("seed")?,
            learning_rate,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_kv_string()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_kv(&KeyValues::parse(&text)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    /// Stop once training MAPE (percent, target units) is at or below this.
    pub error_target_pct: f64,
    pub max_epochs: u64,
    /// Seeds the per-epoch shuffle; unused when shuffling is off.
    pub seed: u64,
    pub shuffle_each_epoch: bool,
    pub eval_every: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.4,
            momentum: 0.0,
            error_target_pct: 0.7,
            max_epochs: 200_000,
            seed: 0,
            shuffle_each_epoch: false,
            eval_every: 100,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Invalid(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Invalid(format!(
                "momentum must lie in [0, 1), got {}",
                self.momentum
            )));
        }
        if !(self.error_target_pct > 0.0) {
            return Err(Error::Invalid(format!(
                "error_target_pct must be positive, got {}",
                self.error_target_pct
            )));
        }
        if self.max_epochs == 0 {
            return Err(Error::Invalid("max_epochs must be positive".into()));
        }
        if self.eval_every == 0 {
            return Err(Error::Invalid("eval_every must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    pub epochs_run: u64,
    pub final_train_mape_pct: f64,
    /// `(epoch, MAPE %)` at every evaluation, starting with epoch 0.
    pub error_history: Vec<(u64, f64)>,
    pub converged: bool,
}
