//! Least-squares fit of `y = b0 + b1*T + b2*DOD + b3*C`.
//!
//! The design matrix `[1, T, DOD, C]` mixes unit-scale and 1e4-scale
//! columns, so the fit goes through a Householder QR factorization rather
//! than the normal equations.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dataset::{CyclingDataset, InputRanges, Range, Target, Variable};
use crate::error::{Error, Result};
use crate::kv::{finite, KeyValues, KvWriter};
use crate::simulate::DegradationModelParams;

pub const LINEAR_SCHEMA_VERSION: u32 = 1;

const COLUMNS: [&str; 4] = ["intercept", "temperature_c", "dod_pct", "cycle"];

/// A column is rank deficient when its norm after orthogonalization
/// against the preceding columns falls below this fraction of its original
/// norm.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualStats {
    pub rmse: f64,
    pub max_abs_residual: f64,
    pub n: usize,
}

/// Signed coefficients: a fade model has negative slopes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub target: Target,
    pub intercept: f64,
    pub coeff_t: f64,
    pub coeff_dod: f64,
    pub coeff_cycle: f64,
    pub residual_stats: Option<ResidualStats>,
    /// Input ranges of the training data, when the model was fitted.
    pub input_ranges: Option<InputRanges>,
}

impl LinearModel {
    pub fn new(target: Target, intercept: f64, coeff_t: f64, coeff_dod: f64, coeff_cycle: f64) -> Self {
        Self {
            target,
            intercept,
            coeff_t,
            coeff_dod,
            coeff_cycle,
            residual_stats: None,
            input_ranges: None,
        }
    }

    /// The degradation model's RC or EODV equation as a linear model.
    pub fn from_params(params: &DegradationModelParams, target: Target) -> Self {
        match target {
            Target::Rc => Self::new(
                target,
                params.rc_intercept,
                -params.rc_coeff_t,
                -params.rc_coeff_dod,
                -params.rc_coeff_cycle,
            ),
            Target::Eodv => Self::new(
                target,
                params.eodv_intercept,
                -params.eodv_coeff_t,
                -params.eodv_coeff_dod,
                -params.eodv_coeff_cycle,
            ),
        }
    }

    pub fn coefficients(&self) -> [f64; 4] {
        [self.intercept, self.coeff_t, self.coeff_dod, self.coeff_cycle]
    }

    pub fn predict(&self, temperature_c: f64, dod_pct: f64, cycle: f64) -> f64 {
        self.intercept + self.coeff_t * temperature_c + self.coeff_dod * dod_pct + self.coeff_cycle * cycle
    }

    /// `|coefficient| * (max - min)` per input, largest first. Ties keep
    /// the order T, DOD, C.
    pub fn effect_ranking(&self, ranges: &InputRanges) -> Result<Vec<(Variable, f64)>> {
        let mut effects = Vec::with_capacity(3);
        for (var, coeff) in Variable::INPUTS
            .into_iter()
            .zip([self.coeff_t, self.coeff_dod, self.coeff_cycle])
        {
            let r = ranges.get(var).expect("input variable");
            if !(r.span() > 0.0) {
                return Err(Error::DegenerateRange {
                    variable: var.name().to_string(),
                    value: r.min,
                });
            }
            effects.push((var, coeff.abs() * r.span()));
        }
        effects.sort_by(|a, b| b.1.total_cmp(&a.1));
        Ok(effects)
    }

    pub fn to_kv_string(&self) -> String {
        let mut w = KvWriter::new();
        w.comment("linear degradation model: y = intercept + coeff_t*T + coeff_dod*DOD + coeff_cycle*C")
            .entry("schema_version", LINEAR_SCHEMA_VERSION)
            .entry("kind", "linear")
            .entry("target", self.target)
            .num("intercept", self.intercept)
            .num("coeff_t", self.coeff_t)
            .num("coeff_dod", self.coeff_dod)
            .num("coeff_cycle", self.coeff_cycle);
        if let Some(s) = self.residual_stats {
            w.num("rmse", s.rmse)
                .num("max_abs_residual", s.max_abs_residual)
                .entry("n", s.n);
        }
        if let Some(r) = self.input_ranges {
            w.nums("range.temperature_c", &[r.temperature_c.min, r.temperature_c.max])
                .nums("range.dod_pct", &[r.dod_pct.min, r.dod_pct.max])
                .nums("range.cycle", &[r.cycle.min, r.cycle.max]);
        }
        w.finish()
    }

    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        let version: u32 = kv.require("schema_version")?;
        if version != LINEAR_SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: version,
                expected: LINEAR_SCHEMA_VERSION,
            });
        }
        match kv.get_str("kind") {
            Some("linear") => {}
            other => {
                return Err(Error::Invalid(format!(
                    "expected kind=linear, got {}",
                    other.unwrap_or("<none>")
                )))
            }
        }
        let target: Target = kv.require::<String>("target")?.parse()?;
        let num = |key: &str| -> Result<f64> { finite(kv.require(key)?, key) };
        let mut model = Self::new(
            target,
            num("intercept")?,
            num("coeff_t")?,
            num("coeff_dod")?,
            num("coeff_cycle")?,
        );
        if kv.get_str("n").is_some() {
            model.residual_stats = Some(ResidualStats {
                rmse: num("rmse")?,
                max_abs_residual: num("max_abs_residual")?,
                n: kv.require("n")?,
            });
        }
        let range = |key: &str| -> Result<Option<Range>> {
            match kv.get_list::<f64>(key)? {
                None => Ok(None),
                Some(v) if v.len() == 2 => Ok(Some(Range::new(v[0], v[1]))),
                Some(_) => Err(Error::Invalid(format!("{key} needs two numbers"))),
            }
        };
        if let (Some(t), Some(d), Some(c)) = (
            range("range.temperature_c")?,
            range("range.dod_pct")?,
            range("range.cycle")?,
        ) {
            model.input_ranges = Some(InputRanges {
                temperature_c: t,
                dod_pct: d,
                cycle: c,
            });
        }
        Ok(model)
    }
}

fn fmt_coeff(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || a >= 1e-3 {
        format!("{a:.4}")
    } else {
        format!("{a:.4e}")
    }
}

/// Prints the model as an equation, e.g.
/// `RC = 110.2900 - 0.7551*T - 0.2977*DOD - 0.0014*C`.
impl fmt::Display for LinearModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.target {
            Target::Rc => "RC",
            Target::Eodv => "EODV",
        };
        let sign = if self.intercept < 0.0 { "-" } else { "" };
        write!(f, "{name} = {sign}{}", fmt_coeff(self.intercept))?;
        for (coeff, sym) in [(self.coeff_t, "T"), (self.coeff_dod, "DOD"), (self.coeff_cycle, "C")] {
            let op = if coeff < 0.0 { '-' } else { '+' };
            write!(f, " {op} {}*{sym}", fmt_coeff(coeff))?;
        }
        Ok(())
    }
}

/// Ordinary least squares on `[1, T, DOD, C]`.
pub fn fit_ols(dataset: &CyclingDataset, target: Target) -> Result<LinearModel> {
    let ys = dataset.target_values(target)?;
    let n = ys.len();
    if n < COLUMNS.len() {
        return Err(Error::InsufficientData {
            needed: COLUMNS.len(),
            got: n,
        });
    }
    let design: Vec<[f64; 4]> = dataset
        .records()
        .iter()
        .map(|r| [1.0, r.temperature_c, r.dod_pct, r.cycle as f64])
        .collect();
    let coeffs = householder_lstsq(&design, &ys)?;
    let mut model = LinearModel::new(target, coeffs[0], coeffs[1], coeffs[2], coeffs[3]);

    let mut sum_sq = 0.0;
    let mut max_abs: f64 = 0.0;
    for (r, y) in dataset.records().iter().zip(&ys) {
        let res = y - model.predict(r.temperature_c, r.dod_pct, r.cycle as f64);
        sum_sq += res * res;
        max_abs = max_abs.max(res.abs());
    }
    model.residual_stats = Some(ResidualStats {
        rmse: (sum_sq / n as f64).sqrt(),
        max_abs_residual: max_abs,
        n,
    });
    model.input_ranges = InputRanges::of(dataset);
    Ok(model)
}

/// Solves `min ||X b - y||` for a tall `n x 4` matrix given by rows.
fn householder_lstsq(rows: &[[f64; 4]], y: &[f64]) -> Result<[f64; 4]> {
    const P: usize = 4;
    let n = rows.len();
    // Column-major copy so reflections walk contiguous memory.
    let mut a: Vec<Vec<f64>> = (0..P).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    let mut qty = y.to_vec();
    let original_norm: Vec<f64> = a.iter().map(|col| norm(col)).collect();

    for k in 0..P {
        let sub_norm = norm(&a[k][k..]);
        if original_norm[k] == 0.0 || sub_norm <= RANK_TOLERANCE * original_norm[k] {
            return Err(Error::RankDeficient {
                column: COLUMNS[k].to_string(),
            });
        }
        let alpha = if a[k][k] > 0.0 { -sub_norm } else { sub_norm };
        // v = x - alpha e1, stored in place of column k below the diagonal.
        let mut v: Vec<f64> = a[k][k..].to_vec();
        v[0] -= alpha;
        let v_norm_sq: f64 = v.iter().map(|x| x * x).sum();
        let reflect = |col: &mut [f64]| {
            let dot: f64 = v.iter().zip(col.iter()).map(|(a, b)| a * b).sum();
            let scale = 2.0 * dot / v_norm_sq;
            for (c, vi) in col.iter_mut().zip(&v) {
                *c -= scale * vi;
            }
        };
        a[k][k] = alpha;
        for x in a[k][k + 1..].iter_mut() {
            *x = 0.0;
        }
        for col in a.iter_mut().skip(k + 1) {
            reflect(&mut col[k..]);
        }
        reflect(&mut qty[k..n]);
    }

    let mut b = [0.0; P];
    for i in (0..P).rev() {
        let mut s = qty[i];
        for j in i + 1..P {
            s -= a[j][i] * b[j];
        }
        b[i] = s / a[i][i];
    }
    Ok(b)
}

fn norm(xs: &[f64]) -> f64 {
    // Scaled to avoid overflow on large cycle columns.
    let scale = xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * xs.iter().map(|x| (x / scale).powi(2)).sum::<f64>().sqrt()
}
