//! Degradation models for Li-ion cells on low-earth-orbit duty cycles.
//!
//! The crate covers the whole pipeline around two quantities, retained
//! capacity (RC, percent of rated capacity) and end-of-discharge voltage
//! (EODV, volts), as functions of temperature, depth of discharge and cycle
//! count:
//!
//! - [`simulate`] generates synthetic cycling data from an affine
//!   degradation model and solves for cycle life in closed form.
//! - [`dataset`] holds records, CSV I/O, min-max normalization and the
//!   even/odd cycle split used for interpolation checks.
//! - [`regress`] fits `y = b0 + b1*T + b2*DOD + b3*C` by Householder QR.
//! - [`mlp`] is a small sigmoid feed-forward network trained by online
//!   backpropagation, with a resumable plain-text weights file.
//! - [`metrics`] implements the method-comparison statistics (AAPE, Pearson
//!   r, CV, Bland-Altman).
//!
//! Every random draw goes through [`rng::SplitMix64`], so datasets and
//! initial weights are reproducible from a seed alone.

pub mod dataset;
pub mod error;
pub mod kv;
pub mod metrics;
pub mod mlp;
pub mod model_file;
pub mod regress;
pub mod rng;
pub mod simulate;

pub use dataset::{CyclingDataset, CyclingRecord, NormalizationSpec, Target, Variable};
pub use error::{Error, Result};
pub use metrics::{BlandAltmanMode, BlandAltmanStats, ComparisonReport, PairedSeries};
pub use mlp::{MlpModel, NetworkTopology, TrainingConfig, TrainingReport};
pub use model_file::AnyModel;
pub use regress::LinearModel;
pub use simulate::{CycleLife, DegradationModelParams, SimulationPlan};
