//! Model files that identify their own kind through the `kind=` key.

use std::path::Path;

use crate::dataset::Target;
use crate::error::{Error, Result};
use crate::kv::KeyValues;
use crate::mlp::MlpModel;
use crate::regress::LinearModel;

#[derive(Debug, Clone, PartialEq)]
pub enum AnyModel {
    Linear(LinearModel),
    Mlp(MlpModel),
}

impl AnyModel {
    pub fn parse(text: &str) -> Result<Self> {
        let kv = KeyValues::parse(text)?;
        match kv.get_str("kind") {
            Some("linear") => LinearModel::from_kv(&kv).map(AnyModel::Linear),
            Some("mlp") => MlpModel::from_kv(&kv).map(AnyModel::Mlp),
            Some(other) => Err(Error::Invalid(format!("unknown model kind `{other}`"))),
            None => Err(Error::Invalid("model file has no `kind` key".into())),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_kv_string(&self) -> String {
        match self {
            AnyModel::Linear(m) => m.to_kv_string(),
            AnyModel::Mlp(m) => m.to_kv_string(),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_kv_string()).map_err(|e| Error::io(path, e))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            AnyModel::Linear(_) => "linear",
            AnyModel::Mlp(_) => "mlp",
        }
    }

    pub fn target(&self) -> Target {
        match self {
            AnyModel::Linear(m) => m.target,
            AnyModel::Mlp(m) => m.target,
        }
    }

    pub fn predict(&self, temperature_c: f64, dod_pct: f64, cycle: f64) -> f64 {
        match self {
            AnyModel::Linear(m) => m.predict(temperature_c, dod_pct, cycle),
            AnyModel::Mlp(m) => m.predict(temperature_c, dod_pct, cycle),
        }
    }

    /// Inputs outside the range the model was fitted on. Linear models
    /// built directly from coefficients have no range and never complain.
    pub fn out_of_range(&self, temperature_c: f64, dod_pct: f64, cycle: f64) -> Vec<Error> {
        match self {
            AnyModel::Linear(m) => m
                .input_ranges
                .map(|r| r.out_of_range(temperature_c, dod_pct, cycle))
                .unwrap_or_default(),
            AnyModel::Mlp(m) => m.normalization.out_of_range(temperature_c, dod_pct, cycle),
        }
    }
}

impl From<LinearModel> for AnyModel {
    fn from(m: LinearModel) -> Self {
        AnyModel::Linear(m)
    }
}

impl From<MlpModel> for AnyModel {
    fn from(m: MlpModel) -> Self {
        AnyModel::Mlp(m)
    }
}
