//! Cycling records, CSV I/O, normalization and splitting.
//!
//! CSV layout (exact):
//!
//! ```text
//! temperature_c,dod_pct,cycle,rc_pct,eodv_v
//! 10,10,0,99.762,2.9256
//! ```
//!
//! Absent optional values are empty fields. Numbers are written as the
//! shortest decimal string that parses back to the same `f64`. Lines end in
//! `\n`.

use std::cmp::Ordering;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kv::fmt_num;

pub const CSV_HEADER: [&str; 5] = ["temperature_c", "dod_pct", "cycle", "rc_pct", "eodv_v"];

/// Upper bound accepted for retained capacity. The affine capacity model
/// starts above 100 % near cycle 0 at low temperature and DOD.
pub const RC_MAX_PCT: f64 = 120.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Rc,
    Eodv,
}

impl Target {
    pub fn column(self) -> &'static str {
        match self {
            Target::Rc => "rc_pct",
            Target::Eodv => "eodv_v",
        }
    }

    pub fn units(self) -> &'static str {
        match self {
            Target::Rc => "%",
            Target::Eodv => "V",
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::Rc => "rc",
            Target::Eodv => "eodv",
        })
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rc" | "rc_pct" => Ok(Target::Rc),
            "eodv" | "eodv_v" => Ok(Target::Eodv),
            _ => Err(Error::Invalid(format!("unknown target `{s}` (expected rc or eodv)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CyclingRecord {
    pub temperature_c: f64,
    pub dod_pct: f64,
    pub cycle: u32,
    pub rc_pct: Option<f64>,
    pub eodv_v: Option<f64>,
}

impl CyclingRecord {
    pub fn new(temperature_c: f64, dod_pct: f64, cycle: u32) -> Self {
        Self {
            temperature_c,
            dod_pct,
            cycle,
            rc_pct: None,
            eodv_v: None,
        }
    }

    pub fn with_rc(mut self, rc_pct: f64) -> Self {
        self.rc_pct = Some(rc_pct);
        self
    }

    pub fn with_eodv(mut self, eodv_v: f64) -> Self {
        self.eodv_v = Some(eodv_v);
        self
    }

    pub fn target(&self, target: Target) -> Option<f64> {
        match target {
            Target::Rc => self.rc_pct,
            Target::Eodv => self.eodv_v,
        }
    }

    pub fn inputs(&self) -> [f64; 3] {
        [self.temperature_c, self.dod_pct, self.cycle as f64]
    }

    /// EODV is only required to be finite: the printed voltage model goes
    /// negative at the hottest, deepest setting late in life, and those
    /// records still have to round-trip.
    pub fn validate(&self) -> Result<()> {
        if !self.temperature_c.is_finite() {
            return Err(Error::Invalid(format!(
                "temperature_c must be finite, got {}",
                self.temperature_c
            )));
        }
        if !self.dod_pct.is_finite() {
            return Err(Error::Invalid(format!(
                "dod_pct must be finite, got {}",
                self.dod_pct
            )));
        }
        if let Some(rc) = self.rc_pct {
            if !(0.0..=RC_MAX_PCT).contains(&rc) {
                return Err(Error::Invalid(format!(
                    "rc_pct must lie in [0, {RC_MAX_PCT}], got {rc}"
                )));
            }
        }
        if let Some(v) = self.eodv_v {
            if !v.is_finite() {
                return Err(Error::Invalid(format!("eodv_v must be finite, got {v}")));
            }
        }
        Ok(())
    }

    fn key_cmp(&self, other: &Self) -> Ordering {
        self.temperature_c
            .total_cmp(&other.temperature_c)
            .then(self.dod_pct.total_cmp(&other.dod_pct))
            .then(self.cycle.cmp(&other.cycle))
    }

    fn same_setting(&self, other: &Self) -> bool {
        self.temperature_c.to_bits() == other.temperature_c.to_bits()
            && self.dod_pct.to_bits() == other.dod_pct.to_bits()
    }
}

/// Records sorted by `(temperature_c, dod_pct, cycle)` with no duplicate
/// triples. Immutable once built.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CyclingDataset {
    records: Vec<CyclingRecord>,
    source: String,
}

impl CyclingDataset {
    pub fn new(records: Vec<CyclingRecord>, source: impl Into<String>) -> Result<Self> {
        let numbered = records
            .into_iter()
            .enumerate()
            .map(|(i, r)| (i as u64 + 1, r))
            .collect();
        Self::from_numbered(numbered, source.into())
    }

    /// `numbered` pairs each record with the line (or position) it came
    /// from so errors can point back at the input.
    fn from_numbered(mut numbered: Vec<(u64, CyclingRecord)>, source: String) -> Result<Self> {
        for (line, r) in &numbered {
            r.validate().map_err(|e| Error::Malformed {
                line: *line,
                message: e.to_string(),
            })?;
        }
        numbered.sort_by(|a, b| a.1.key_cmp(&b.1));
        for pair in numbered.windows(2) {
            if pair[0].1.key_cmp(&pair[1].1) == Ordering::Equal {
                let r = pair[1].1;
                return Err(Error::DuplicateRecord {
                    line: pair[0].0.max(pair[1].0),
                    temperature_c: r.temperature_c,
                    dod_pct: r.dod_pct,
                    cycle: r.cycle,
                });
            }
        }
        Ok(Self {
            records: numbered.into_iter().map(|(_, r)| r).collect(),
            source,
        })
    }

    pub fn records(&self) -> &[CyclingRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Distinct `(temperature_c, dod_pct)` pairs in sorted order.
    pub fn settings(&self) -> Vec<(f64, f64)> {
        self.groups()
            .map(|g| (g[0].temperature_c, g[0].dod_pct))
            .collect()
    }

    /// Records grouped by setting; each group is sorted by cycle.
    pub fn groups(&self) -> impl Iterator<Item = &[CyclingRecord]> {
        self.records.chunk_by(|a, b| a.same_setting(b))
    }

    /// Target values in record order, failing on the first absent one.
    pub fn target_values(&self, target: Target) -> Result<Vec<f64>> {
        self.records
            .iter()
            .enumerate()
            .map(|(index, r)| {
                r.target(target).ok_or(Error::MissingTarget {
                    target: target.column().to_string(),
                    index,
                })
            })
            .collect()
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(file, path.display().to_string())
    }

    pub fn from_csv_reader(reader: impl std::io::Read, source: String) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(false)
            .from_reader(reader);
        let header = rdr.headers().map_err(|e| csv_error(e, 1))?.clone();
        if header.iter().map(str::trim).ne(CSV_HEADER) {
            return Err(Error::Malformed {
                line: 1,
                message: format!(
                    "expected header `{}`, got `{}`",
                    CSV_HEADER.join(","),
                    header.iter().collect::<Vec<_>>().join(",")
                ),
            });
        }
        let mut numbered = Vec::new();
        let mut row = csv::StringRecord::new();
        loop {
            let more = rdr.read_record(&mut row).map_err(|e| csv_error(e, 0))?;
            if !more {
                break;
            }
            let line = row.position().map_or(0, |p| p.line());
            numbered.push((line, parse_row(&row, line)?));
        }
        Self::from_numbered(numbered, source)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = CSV_HEADER.join(",");
        out.push('\n');
        let opt = |v: Option<f64>| v.map(fmt_num).unwrap_or_default();
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt_num(r.temperature_c),
                fmt_num(r.dod_pct),
                r.cycle,
                opt(r.rc_pct),
                opt(r.eodv_v)
            ));
        }
        out
    }

    /// Splits each setting's records by rank in cycle order: ranks 0, 2, 4…
    /// go to the first dataset, ranks 1, 3, 5… to the second.
    pub fn split_even_odd(&self) -> (CyclingDataset, CyclingDataset) {
        let mut even = Vec::new();
        let mut odd = Vec::new();
        for group in self.groups() {
            for (rank, r) in group.iter().enumerate() {
                if rank % 2 == 0 {
                    even.push(*r);
                } else {
                    odd.push(*r);
                }
            }
        }
        (
            CyclingDataset {
                records: even,
                source: format!("{} [even ranks]", self.source),
            },
            CyclingDataset {
                records: odd,
                source: format!("{} [odd ranks]", self.source),
            },
        )
    }
}

fn csv_error(e: csv::Error, fallback_line: u64) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line());
    Error::Malformed {
        line,
        message: e.to_string(),
    }
}

fn parse_row(row: &csv::StringRecord, line: u64) -> Result<CyclingRecord> {
    let field = |i: usize| row.get(i).unwrap_or("").trim();
    let bad = |name: &str, value: &str| Error::Malformed {
        line,
        message: format!("{name}: `{value}` is not a number"),
    };
    let num = |i: usize| -> Result<f64> {
        let v = field(i);
        v.parse::<f64>().map_err(|_| bad(CSV_HEADER[i], v))
    };
    let opt = |i: usize| -> Result<Option<f64>> {
        let v = field(i);
        if v.is_empty() {
            Ok(None)
        } else {
            v.parse::<f64>().map(Some).map_err(|_| bad(CSV_HEADER[i], v))
        }
    };
    let cycle_str = field(2);
    let cycle: i64 = cycle_str.parse().map_err(|_| Error::Malformed {
        line,
        message: format!("cycle: `{cycle_str}` is not an integer"),
    })?;
    let cycle = u32::try_from(cycle).map_err(|_| Error::Malformed {
        line,
        message: format!("cycle must be a non-negative integer, got {cycle}"),
    })?;
    Ok(CyclingRecord {
        temperature_c: num(0)?,
        dod_pct: num(1)?,
        cycle,
        rc_pct: opt(3)?,
        eodv_v: opt(4)?,
    })
}

/// Input and target variables of a normalization spec.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variable {
    Temperature,
    Dod,
    Cycle,
    Target,
}

impl Variable {
    pub const INPUTS: [Variable; 3] = [Variable::Temperature, Variable::Dod, Variable::Cycle];

    pub fn name(self) -> &'static str {
        match self {
            Variable::Temperature => "temperature_c",
            Variable::Dod => "dod_pct",
            Variable::Cycle => "cycle",
            Variable::Target => "target",
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "temperature_c" | "t" | "T" => Ok(Variable::Temperature),
            "dod_pct" | "dod" | "DOD" => Ok(Variable::Dod),
            "cycle" | "c" | "C" => Ok(Variable::Cycle),
            "target" | "rc_pct" | "eodv_v" => Ok(Variable::Target),
            _ => Err(Error::UnknownVariable(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    pub fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub fn span(&self) -> f64 {
        self.max - self.min
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.min..=self.max).contains(&x)
    }

    fn of(values: impl Iterator<Item = f64>) -> Option<Self> {
        values.fold(None, |acc, x| match acc {
            None => Some(Range::new(x, x)),
            Some(r) => Some(Range::new(r.min.min(x), r.max.max(x))),
        })
    }
}

/// Ranges of the three model inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputRanges {
    pub temperature_c: Range,
    pub dod_pct: Range,
    pub cycle: Range,
}

impl InputRanges {
    pub fn of(dataset: &CyclingDataset) -> Option<Self> {
        let recs = dataset.records();
        Some(Self {
            temperature_c: Range::of(recs.iter().map(|r| r.temperature_c))?,
            dod_pct: Range::of(recs.iter().map(|r| r.dod_pct))?,
            cycle: Range::of(recs.iter().map(|r| r.cycle as f64))?,
        })
    }

    pub fn get(&self, var: Variable) -> Option<Range> {
        match var {
            Variable::Temperature => Some(self.temperature_c),
            Variable::Dod => Some(self.dod_pct),
            Variable::Cycle => Some(self.cycle),
            Variable::Target => None,
        }
    }

    pub fn out_of_range(&self, temperature_c: f64, dod_pct: f64, cycle: f64) -> Vec<Error> {
        [
            (Variable::Temperature, self.temperature_c, temperature_c),
            (Variable::Dod, self.dod_pct, dod_pct),
            (Variable::Cycle, self.cycle, cycle),
        ]
        .into_iter()
        .filter(|(_, r, x)| !r.contains(*x))
        .map(|(v, r, x)| Error::Extrapolation {
            variable: v.name().to_string(),
            value: x,
            min: r.min,
            max: r.max,
        })
        .collect()
    }
}

/// Min-max affine scaling of inputs and target onto
/// `[output_low, output_high]`, with `0 < output_low < output_high < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationSpec {
    pub temperature_c: Range,
    pub dod_pct: Range,
    pub cycle: Range,
    pub target: Range,
    pub output_low: f64,
    pub output_high: f64,
}

pub const DEFAULT_OUTPUT_LOW: f64 = 0.1;
pub const DEFAULT_OUTPUT_HIGH: f64 = 0.9;

impl NormalizationSpec {
    pub fn new(
        temperature_c: Range,
        dod_pct: Range,
        cycle: Range,
        target: Range,
        output_low: f64,
        output_high: f64,
    ) -> Result<Self> {
        let spec = Self {
            temperature_c,
            dod_pct,
            cycle,
            target,
            output_low,
            output_high,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.output_low > 0.0 && self.output_low < self.output_high && self.output_high < 1.0)
        {
            return Err(Error::Invalid(format!(
                "output bounds must satisfy 0 < low < high < 1, got ({}, {})",
                self.output_low, self.output_high
            )));
        }
        for var in [
            Variable::Temperature,
            Variable::Dod,
            Variable::Cycle,
            Variable::Target,
        ] {
            let r = self.range(var);
            if !(r.min.is_finite() && r.max.is_finite()) {
                return Err(Error::Invalid(format!("{var} range must be finite")));
            }
            if r.max <= r.min {
                return Err(Error::DegenerateRange {
                    variable: var.name().to_string(),
                    value: r.min,
                });
            }
        }
        Ok(())
    }

    /// Per-variable ranges observed in `dataset`.
    pub fn fit(
        dataset: &CyclingDataset,
        target: Target,
        output_low: f64,
        output_high: f64,
    ) -> Result<Self> {
        if dataset.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        let ys = dataset.target_values(target)?;
        let InputRanges {
            temperature_c: t,
            dod_pct: d,
            cycle: c,
        } = InputRanges::of(dataset).unwrap();
        let y = Range::of(ys.into_iter()).unwrap();
        let spec = Self {
            temperature_c: t,
            dod_pct: d,
            cycle: c,
            target: y,
            output_low,
            output_high,
        };
        // Check bounds first so a bad (low, high) is reported as such.
        if !(output_low > 0.0 && output_low < output_high && output_high < 1.0) {
            return spec.validate().map(|_| spec);
        }
        for (var, r) in [
            (Variable::Temperature, t),
            (Variable::Dod, d),
            (Variable::Cycle, c),
            (Variable::Target, y),
        ] {
            if r.max <= r.min {
                let name = match var {
                    Variable::Target => target.column(),
                    v => v.name(),
                };
                return Err(Error::DegenerateRange {
                    variable: name.to_string(),
                    value: r.min,
                });
            }
        }
        Ok(spec)
    }

    pub fn range(&self, var: Variable) -> Range {
        match var {
            Variable::Temperature => self.temperature_c,
            Variable::Dod => self.dod_pct,
            Variable::Cycle => self.cycle,
            Variable::Target => self.target,
        }
    }

    /// Affine map of `[min, max]` onto `[output_low, output_high]`. Values
    /// outside the range extrapolate linearly.
    pub fn normalize(&self, value: f64, var: Variable) -> f64 {
        let r = self.range(var);
        self.output_low + (value - r.min) / r.span() * (self.output_high - self.output_low)
    }

    pub fn denormalize(&self, scaled: f64, var: Variable) -> f64 {
        let r = self.range(var);
        r.min + (scaled - self.output_low) / (self.output_high - self.output_low) * r.span()
    }

    pub fn normalize_inputs(&self, temperature_c: f64, dod_pct: f64, cycle: f64) -> [f64; 3] {
        [
            self.normalize(temperature_c, Variable::Temperature),
            self.normalize(dod_pct, Variable::Dod),
            self.normalize(cycle, Variable::Cycle),
        ]
    }

    pub fn inputs(&self) -> InputRanges {
        InputRanges {
            temperature_c: self.temperature_c,
            dod_pct: self.dod_pct,
            cycle: self.cycle,
        }
    }

    /// Input variables whose value falls outside the fitted range.
    pub fn out_of_range(&self, temperature_c: f64, dod_pct: f64, cycle: f64) -> Vec<Error> {
        self.inputs().out_of_range(temperature_c, dod_pct, cycle)
    }

    /// Sigmoid outputs lie in (0, 1); this is the open interval of target
    /// values the network can produce.
    pub fn prediction_bounds(&self) -> (f64, f64) {
        (
            self.denormalize(0.0, Variable::Target),
            self.denormalize(1.0, Variable::Target),
        )
    }
}
