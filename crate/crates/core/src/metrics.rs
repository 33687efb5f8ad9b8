//! Method-comparison statistics for observed vs predicted series.
//!
//! Sign convention everywhere: difference = predicted - observed, so a
//! positive bias means over-prediction.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kv::fmt_num;

/// Multiplier for Bland-Altman limits of agreement.
pub const LOA_Z: f64 = 1.96;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSeries {
    /// `(observed, predicted)` in identical units.
    pub pairs: Vec<(f64, f64)>,
    pub label: String,
    pub units: String,
}

impl PairedSeries {
    pub fn new(pairs: Vec<(f64, f64)>, label: impl Into<String>, units: impl Into<String>) -> Result<Self> {
        if let Some(i) = pairs.iter().position(|(o, p)| !(o.is_finite() && p.is_finite())) {
            return Err(Error::Invalid(format!("pair {i} is not finite")));
        }
        Ok(Self {
            pairs,
            label: label.into(),
            units: units.into(),
        })
    }

    pub fn from_slices(observed: &[f64], predicted: &[f64]) -> Result<Self> {
        if observed.len() != predicted.len() {
            return Err(Error::Invalid(format!(
                "{} observed vs {} predicted values",
                observed.len(),
                predicted.len()
            )));
        }
        Self::new(
            observed.iter().copied().zip(predicted.iter().copied()).collect(),
            "",
            "",
        )
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Mean of `|observed - predicted| / |observed|`, in percent.
    pub fn aape(&self) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        let mut total = 0.0;
        for (index, &(o, p)) in self.pairs.iter().enumerate() {
            if o == 0.0 {
                return Err(Error::ZeroObserved { index });
            }
            total += ((o - p) / o).abs();
        }
        Ok(100.0 * total / self.len() as f64)
    }

    /// Sample Pearson correlation of observed against predicted.
    pub fn pearson(&self) -> Result<Correlation> {
        if self.len() < 2 {
            return Err(Error::UndefinedCorrelation(format!(
                "need at least 2 pairs, got {}",
                self.len()
            )));
        }
        let m = CoMoments::of(self.pairs.iter().copied());
        if m.sxx == 0.0 {
            return Err(Error::UndefinedCorrelation("observed series is constant".into()));
        }
        if m.syy == 0.0 {
            return Err(Error::UndefinedCorrelation("predicted series is constant".into()));
        }
        let r = (m.sxy / (m.sxx.sqrt() * m.syy.sqrt())).clamp(-1.0, 1.0);
        Ok(Correlation { r, r_squared: r * r })
    }

    /// RMSE of prediction error over the mean observed value.
    pub fn coefficient_of_variation(&self) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        let n = self.len() as f64;
        let mut sq = 0.0;
        let mut obs = 0.0;
        for &(o, p) in &self.pairs {
            sq += (p - o) * (p - o);
            obs += o;
        }
        let mean = obs / n;
        if mean == 0.0 {
            return Err(Error::ZeroMean);
        }
        Ok((sq / n).sqrt() / mean)
    }

    pub fn bland_altman(&self, mode: BlandAltmanMode) -> Result<BlandAltmanStats> {
        if self.len() < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                got: self.len(),
            });
        }
        let mut points = Vec::with_capacity(self.len());
        for (index, &(o, p)) in self.pairs.iter().enumerate() {
            let mean = 0.5 * (o + p);
            let diff = match mode {
                BlandAltmanMode::Absolute => p - o,
                BlandAltmanMode::PercentOfMean => {
                    if mean == 0.0 {
                        return Err(Error::ZeroPairMean { index });
                    }
                    100.0 * (p - o) / mean
                }
            };
            points.push((mean, diff));
        }
        let m = CoMoments::of(points.iter().map(|&(_, d)| (d, d)));
        let bias = m.mean_x;
        let sd_diff = (m.sxx / (m.n - 1.0)).sqrt();
        let (min_diff, max_diff) = points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, d)| (lo.min(d), hi.max(d)));
        Ok(BlandAltmanStats {
            mode,
            points,
            bias,
            sd_diff,
            loa_low: bias - LOA_Z * sd_diff,
            loa_high: bias + LOA_Z * sd_diff,
            min_diff,
            max_diff,
        })
    }

    /// Every statistic at once. A statistic whose preconditions fail is
    /// reported as unavailable with the reason; the others are still filled.
    pub fn comparison_report(&self, ba_mode: BlandAltmanMode) -> ComparisonReport {
        let corr = self.pearson();
        ComparisonReport {
            label: self.label.clone(),
            units: self.units.clone(),
            n: self.len(),
            difference_convention: "predicted - observed".into(),
            aape_pct: self.aape().into(),
            pearson_r: corr.as_ref().map(|c| c.r).map_err(clone_err).into(),
            r_squared: corr.as_ref().map(|c| c.r_squared).map_err(clone_err).into(),
            cv: self.coefficient_of_variation().into(),
            bland_altman: self.bland_altman(ba_mode).into(),
        }
    }

    /// `series,observed,predicted` rows for the data, then two `identity`
    /// rows spanning the min and max over both series.
    pub fn one_to_one_csv(&self) -> String {
        let mut out = String::from("series,observed,predicted\n");
        for &(o, p) in &self.pairs {
            let _ = writeln!(out, "data,{},{}", fmt_num(o), fmt_num(p));
        }
        if let Some((lo, hi)) = self.value_range() {
            let _ = writeln!(out, "identity,{},{}", fmt_num(lo), fmt_num(lo));
            let _ = writeln!(out, "identity,{},{}", fmt_num(hi), fmt_num(hi));
        }
        out
    }

    /// Min and max over observed and predicted values together.
    pub fn value_range(&self) -> Option<(f64, f64)> {
        self.pairs
            .iter()
            .flat_map(|&(o, p)| [o, p])
            .fold(None, |acc, x| match acc {
                None => Some((x, x)),
                Some((lo, hi)) => Some((f64::min(lo, x), f64::max(hi, x))),
            })
    }
}

fn clone_err(e: &Error) -> Error {
    Error::UndefinedCorrelation(match e {
        Error::UndefinedCorrelation(msg) => msg.clone(),
        other => other.to_string(),
    })
}

/// Running means and co-moments (Welford), so every statistic needs a
/// single pass over the data.
struct CoMoments {
    n: f64,
    mean_x: f64,
    sxx: f64,
    syy: f64,
    sxy: f64,
}

impl CoMoments {
    fn of(pairs: impl Iterator<Item = (f64, f64)>) -> Self {
        let mut m = CoMoments {
            n: 0.0,
            mean_x: 0.0,
            sxx: 0.0,
            syy: 0.0,
            sxy: 0.0,
        };
        let mut mean_y = 0.0;
        for (x, y) in pairs {
            m.n += 1.0;
            let dx = x - m.mean_x;
            let dy = y - mean_y;
            m.mean_x += dx / m.n;
            mean_y += dy / m.n;
            m.sxx += dx * (x - m.mean_x);
            m.syy += dy * (y - mean_y);
            m.sxy += dx * (y - mean_y);
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub r: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlandAltmanMode {
    Absolute,
    /// `100 * (predicted - observed) / pair mean`.
    PercentOfMean,
}

impl std::str::FromStr for BlandAltmanMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "absolute" | "abs" => Ok(BlandAltmanMode::Absolute),
            "percent" | "percent_of_mean" | "pct" => Ok(BlandAltmanMode::PercentOfMean),
            _ => Err(Error::Invalid(format!(
                "unknown Bland-Altman mode `{s}` (expected absolute or percent)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlandAltmanStats {
    pub mode: BlandAltmanMode,
    /// `(pair mean, difference)`.
    pub points: Vec<(f64, f64)>,
    pub bias: f64,
    /// Sample standard deviation (n - 1) of the differences.
    pub sd_diff: f64,
    pub loa_low: f64,
    pub loa_high: f64,
    pub min_diff: f64,
    pub max_diff: f64,
}

impl BlandAltmanStats {
    pub fn to_csv(&self) -> String {
        let col = match self.mode {
            BlandAltmanMode::Absolute => "predicted_minus_observed",
            BlandAltmanMode::PercentOfMean => "predicted_minus_observed_pct",
        };
        let mut out = format!("mean,{col}\n");
        for &(m, d) in &self.points {
            let _ = writeln!(out, "{},{}", fmt_num(m), fmt_num(d));
        }
        out
    }
}

/// A statistic or the reason it could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stat<T> {
    Value(T),
    Unavailable(String),
}

impl<T> Stat<T> {
    pub fn value(&self) -> Option<&T> {
        match self {
            Stat::Value(v) => Some(v),
            Stat::Unavailable(_) => None,
        }
    }
}

impl<T> From<Result<T>> for Stat<T> {
    fn from(r: Result<T>) -> Self {
        match r {
            Ok(v) => Stat::Value(v),
            Err(e) => Stat::Unavailable(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub label: String,
    pub units: String,
    pub n: usize,
    pub difference_convention: String,
    pub aape_pct: Stat<f64>,
    pub pearson_r: Stat<f64>,
    pub r_squared: Stat<f64>,
    pub cv: Stat<f64>,
    pub bland_altman: Stat<BlandAltmanStats>,
}

impl ComparisonReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(pairs: &[(f64, f64)]) -> PairedSeries {
        PairedSeries::new(pairs.to_vec(), "t", "u").unwrap()
    }

    #[test]
    fn aape_examples() {
        assert!((series(&[(100.0, 99.0), (50.0, 50.5)]).aape().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(series(&[(3.0, 3.0), (4.0, 4.0)]).aape().unwrap(), 0.0);
        assert!(matches!(
            series(&[(1.0, 1.0), (0.0, 1.0)]).aape(),
            Err(Error::ZeroObserved { index: 1 })
        ));
    }

    #[test]
    fn pearson_examples() {
        let same = series(&[(1.0, 1.0), (2.0, 2.0), (5.0, 5.0)]).pearson().unwrap();
        assert!((same.r - 1.0).abs() < 1e-15);
        let anti = series(&[(1.0, 9.0), (2.0, 8.0), (5.0, 5.0)]).pearson().unwrap();
        assert!((anti.r + 1.0).abs() < 1e-15);
        // Hand computation: cov = 0.5 (n-1 scaling), var_x = var_y = 1.
        let half = series(&[(1.0, 2.0), (2.0, 1.0), (3.0, 3.0)]).pearson().unwrap();
        assert!((half.r - 0.5).abs() < 1e-15);
        assert_eq!(half.r_squared, half.r * half.r);
    }

    #[test]
    fn pearson_undefined_cases() {
        assert!(series(&[(1.0, 2.0)]).pearson().is_err());
        assert!(matches!(
            series(&[(1.0, 2.0), (1.0, 3.0)]).pearson(),
            Err(Error::UndefinedCorrelation(_))
        ));
    }

    #[test]
    fn cv_examples() {
        assert_eq!(series(&[(5.0, 5.0), (6.0, 6.0)]).coefficient_of_variation().unwrap(), 0.0);
        let cv = series(&[(100.0, 101.0), (100.0, 99.0)]).coefficient_of_variation().unwrap();
        assert!((cv - 0.01).abs() < 1e-15);
        let one = series(&[(10.0, 11.0)]).coefficient_of_variation().unwrap();
        assert!((one - 0.1).abs() < 1e-15);
        assert!(matches!(
            series(&[(-1.0, 0.0), (1.0, 0.0)]).coefficient_of_variation(),
            Err(Error::ZeroMean)
        ));
    }

    #[test]
    fn bland_altman_absolute_example() {
        let ba = series(&[(100.0, 102.0), (100.0, 98.0)])
            .bland_altman(BlandAltmanMode::Absolute)
            .unwrap();
        assert_eq!(ba.points, vec![(101.0, 2.0), (99.0, -2.0)]);
        assert_eq!(ba.bias, 0.0);
        assert!((ba.sd_diff - 8f64.sqrt()).abs() < 1e-14);
        assert!((ba.loa_high - 1.96 * 8f64.sqrt()).abs() < 1e-13);
        assert!((ba.loa_high - 5.543).abs() < 1e-3);
        assert_eq!(ba.loa_low, -ba.loa_high);
        assert_eq!((ba.min_diff, ba.max_diff), (-2.0, 2.0));
    }

    #[test]
    fn bland_altman_percent_example() {
        let ba = series(&[(100.0, 102.0), (100.0, 98.0)])
            .bland_altman(BlandAltmanMode::PercentOfMean)
            .unwrap();
        assert!((ba.points[0].1 - 200.0 / 101.0).abs() < 1e-14);
        assert!((ba.points[1].1 + 200.0 / 99.0).abs() < 1e-14);
        assert!((ba.points[0].1 - 1.980198).abs() < 1e-6);
        assert!((ba.points[1].1 + 2.020202).abs() < 1e-6);
    }

    #[test]
    fn bland_altman_identity_and_errors() {
        let ba = series(&[(1.0, 1.0), (2.0, 2.0), (3.0, 3.0)])
            .bland_altman(BlandAltmanMode::Absolute)
            .unwrap();
        assert_eq!((ba.bias, ba.loa_low, ba.loa_high), (0.0, 0.0, 0.0));
        assert!(series(&[(1.0, 1.0)]).bland_altman(BlandAltmanMode::Absolute).is_err());
        assert!(matches!(
            series(&[(1.0, -1.0), (2.0, 2.0)]).bland_altman(BlandAltmanMode::PercentOfMean),
            Err(Error::ZeroPairMean { index: 0 })
        ));
    }

    #[test]
    fn report_marks_unavailable_fields() {
        let r = series(&[(5.0, 5.1), (5.0, 4.9), (5.0, 5.0)]).comparison_report(BlandAltmanMode::Absolute);
        assert!(matches!(r.pearson_r, Stat::Unavailable(_)));
        assert!(matches!(r.r_squared, Stat::Unavailable(_)));
        assert!(r.aape_pct.value().is_some());
        assert!(r.cv.value().is_some());
        assert!(r.bland_altman.value().is_some());
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert!(json["pearson_r"]["unavailable"].is_string());
        assert!(json["aape_pct"]["value"].is_number());
    }

    #[test]
    fn perfect_prediction_report() {
        let r = series(&[(1.0, 1.0), (2.0, 2.0), (4.0, 4.0)]).comparison_report(BlandAltmanMode::Absolute);
        assert_eq!(r.aape_pct, Stat::Value(0.0));
        assert!((r.pearson_r.value().unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(r.cv, Stat::Value(0.0));
        assert_eq!(r.bland_altman.value().unwrap().bias, 0.0);
    }

    #[test]
    fn one_to_one_rows() {
        let csv = series(&[(1.0, 2.0), (3.0, 0.5), (2.0, 2.0)]).one_to_one_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 1 + 3 + 2);
        assert_eq!(lines[4], "identity,0.5,0.5");
        assert_eq!(lines[5], "identity,3,3");
        let empty = series(&[]).one_to_one_csv();
        assert_eq!(empty, "series,observed,predicted\n");
    }
}
