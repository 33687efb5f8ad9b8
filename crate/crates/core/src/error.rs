use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },

    #[error("line {line}: duplicate record for T={temperature_c}, DOD={dod_pct}, cycle={cycle}")]
    DuplicateRecord {
        line: u64,
        temperature_c: f64,
        dod_pct: f64,
        cycle: u32,
    },

    #[error("invalid value: {0}")]
    Invalid(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("degenerate range for {variable}: min = max = {value}")]
    DegenerateRange { variable: String, value: f64 },

    #[error("record {index} has no {target} value")]
    MissingTarget { target: String, index: usize },

    #[error("need at least {needed} records, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("design matrix is rank deficient: column `{column}` is collinear with the preceding columns")]
    RankDeficient { column: String },

    #[error("training diverged at epoch {epoch}: non-finite loss")]
    Divergence { epoch: u64 },

    #[error("observed value at pair {index} is zero; percentage errors need observations bounded away from 0")]
    ZeroObserved { index: usize },

    #[error("mean of observed values is zero")]
    ZeroMean,

    #[error("pair {index} has zero mean; percent-of-mean differences are undefined")]
    ZeroPairMean { index: usize },

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("model file schema_version {found} is not supported (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },

    #[error("layer {layer}: {message}")]
    Shape { layer: usize, message: String },

    #[error("model mismatch: {0}")]
    Mismatch(String),

    #[error("{variable} = {value} lies outside the fitted range [{min}, {max}]")]
    Extrapolation {
        variable: String,
        value: f64,
        min: f64,
        max: f64,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the numerics (divergence, rank deficiency) as
    /// opposed to bad input or usage.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::RankDeficient { .. }
                | Error::Divergence { .. }
                | Error::UndefinedCorrelation(_)
        )
    }
}
