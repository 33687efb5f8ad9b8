//! Synthetic cycling data from the affine degradation model
//!
//! ```text
//! RC   = rc_intercept   - rc_coeff_t*T   - rc_coeff_dod*DOD   - rc_coeff_cycle*C
//! EODV = eodv_intercept - eodv_coeff_t*T - eodv_coeff_dod*DOD - eodv_coeff_cycle*C
//! ```
//!
//! Coefficients are stored as the positive magnitudes being subtracted.

use serde::{Deserialize, Serialize};

use crate::dataset::{CyclingDataset, CyclingRecord};
use crate::error::{Error, Result};
use crate::kv::{finite, KeyValues, KvWriter};
use crate::rng::SplitMix64;

/// The six (temperature °C, DOD %) settings of the reference test campaign.
pub const REFERENCE_SETTINGS: [(f64, f64); 6] = [
    (10.0, 10.0),
    (10.0, 20.0),
    (20.0, 20.0),
    (10.0, 30.0),
    (20.0, 30.0),
    (30.0, 30.0),
];

/// Failure thresholds: capacity below 40 % or EODV below 2.5 V.
pub const RC_FAILURE_PCT: f64 = 40.0;
pub const EODV_FAILURE_V: f64 = 2.5;

/// Optional early-life acceleration of capacity fade. Up to `cycle` the RC
/// cycle slope is multiplied by `early_slope_multiplier`; afterwards the
/// plain slope applies. The curve stays continuous at the knee. EODV is not
/// affected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityKnee {
    pub cycle: u32,
    pub early_slope_multiplier: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegradationModelParams {
    pub rc_intercept: f64,
    pub rc_coeff_t: f64,
    pub rc_coeff_dod: f64,
    pub rc_coeff_cycle: f64,
    pub eodv_intercept: f64,
    pub eodv_coeff_t: f64,
    pub eodv_coeff_dod: f64,
    pub eodv_coeff_cycle: f64,
    pub knee: Option<CapacityKnee>,
}

impl Default for DegradationModelParams {
    fn default() -> Self {
        Self {
            rc_intercept: 110.29,
            rc_coeff_t: 0.7551,
            rc_coeff_dod: 0.2977,
            rc_coeff_cycle: 0.0014,
            eodv_intercept: 4.3156,
            eodv_coeff_t: 0.1297,
            eodv_coeff_dod: 0.0093,
            eodv_coeff_cycle: 7.1705e-6,
            knee: None,
        }
    }
}

const PARAM_KEYS: [&str; 10] = [
    "rc_intercept",
    "rc_coeff_t",
    "rc_coeff_dod",
    "rc_coeff_cycle",
    "eodv_intercept",
    "eodv_coeff_t",
    "eodv_coeff_dod",
    "eodv_coeff_cycle",
    "knee_cycle",
    "knee_slope_multiplier",
];

impl DegradationModelParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.rc_intercept,
            self.rc_coeff_t,
            self.rc_coeff_dod,
            self.rc_coeff_cycle,
            self.eodv_intercept,
            self.eodv_coeff_t,
            self.eodv_coeff_dod,
            self.eodv_coeff_cycle,
        ];
        for (name, v) in PARAM_KEYS.iter().zip(fields) {
            finite(v, name)?;
        }
        if let Some(k) = self.knee {
            finite(k.early_slope_multiplier, "knee_slope_multiplier")?;
        }
        Ok(())
    }

    /// RC cycle term as a function of cycle, honoring the knee.
    fn rc_cycle_loss(&self, cycle: f64) -> f64 {
        match self.knee {
            None => self.rc_coeff_cycle * cycle,
            Some(k) => {
                let knee = k.cycle as f64;
                if cycle <= knee {
                    self.rc_coeff_cycle * k.early_slope_multiplier * cycle
                } else {
                    self.rc_coeff_cycle * (k.early_slope_multiplier * knee + (cycle - knee))
                }
            }
        }
    }

    /// Retained capacity in percent, unclamped.
    pub fn eval_rc(&self, temperature_c: f64, dod_pct: f64, cycle: u32) -> f64 {
        self.rc_at(temperature_c, dod_pct, cycle as f64)
    }

    fn rc_at(&self, t: f64, dod: f64, cycle: f64) -> f64 {
        self.rc_intercept - self.rc_coeff_t * t - self.rc_coeff_dod * dod - self.rc_cycle_loss(cycle)
    }

    /// End-of-discharge voltage in volts, unclamped.
    pub fn eval_eodv(&self, temperature_c: f64, dod_pct: f64, cycle: u32) -> f64 {
        self.eodv_at(temperature_c, dod_pct, cycle as f64)
    }

    fn eodv_at(&self, t: f64, dod: f64, cycle: f64) -> f64 {
        self.eodv_intercept
            - self.eodv_coeff_t * t
            - self.eodv_coeff_dod * dod
            - self.eodv_coeff_cycle * cycle
    }

    /// Overwrites the fields named in `kv`; other fields keep their value.
    pub fn apply_kv(&mut self, kv: &KeyValues) -> Result<()> {
        let slots: [(&str, &mut f64); 8] = [
            ("rc_intercept", &mut self.rc_intercept),
            ("rc_coeff_t", &mut self.rc_coeff_t),
            ("rc_coeff_dod", &mut self.rc_coeff_dod),
            ("rc_coeff_cycle", &mut self.rc_coeff_cycle),
            ("eodv_intercept", &mut self.eodv_intercept),
            ("eodv_coeff_t", &mut self.eodv_coeff_t),
            ("eodv_coeff_dod", &mut self.eodv_coeff_dod),
            ("eodv_coeff_cycle", &mut self.eodv_coeff_cycle),
        ];
        for (key, slot) in slots {
            if let Some(v) = kv.get(key)? {
                *slot = v;
            }
        }
        match (
            kv.get::<u32>("knee_cycle")?,
            kv.get::<f64>("knee_slope_multiplier")?,
        ) {
            (None, None) => {}
            (Some(cycle), Some(m)) => {
                self.knee = Some(CapacityKnee {
                    cycle,
                    early_slope_multiplier: m,
                })
            }
            _ => {
                return Err(Error::Invalid(
                    "knee_cycle and knee_slope_multiplier must be given together".into(),
                ))
            }
        }
        self.validate()
    }

    pub fn write_kv(&self, w: &mut KvWriter) {
        w.num("rc_intercept", self.rc_intercept)
            .num("rc_coeff_t", self.rc_coeff_t)
            .num("rc_coeff_dod", self.rc_coeff_dod)
            .num("rc_coeff_cycle", self.rc_coeff_cycle)
            .num("eodv_intercept", self.eodv_intercept)
            .num("eodv_coeff_t", self.eodv_coeff_t)
            .num("eodv_coeff_dod", self.eodv_coeff_dod)
            .num("eodv_coeff_cycle", self.eodv_coeff_cycle);
        if let Some(k) = self.knee {
            w.entry("knee_cycle", k.cycle)
                .num("knee_slope_multiplier", k.early_slope_multiplier);
        }
    }

    pub fn keys() -> &'static [&'static str] {
        &PARAM_KEYS
    }

    pub fn cycle_life(
        &self,
        temperature_c: f64,
        dod_pct: f64,
        rc_floor: f64,
        eodv_floor: f64,
        horizon: u32,
    ) -> CycleLife {
        let rc = self.rc_crossing(temperature_c, dod_pct, rc_floor);
        let eodv = self.eodv_crossing(temperature_c, dod_pct, eodv_floor);
        CycleLife::from_crossings(rc, eodv, horizon)
    }

    fn rc_crossing(&self, t: f64, dod: f64, floor: f64) -> Option<u64> {
        let f = |c: f64| self.rc_at(t, dod, c);
        match self.knee {
            None => first_below(f, self.rc_coeff_cycle, floor, 0, None),
            Some(k) => first_below(
                f,
                self.rc_coeff_cycle * k.early_slope_multiplier,
                floor,
                0,
                Some(k.cycle as u64),
            )
            .or_else(|| first_below(f, self.rc_coeff_cycle, floor, k.cycle as u64, None)),
        }
    }

    fn eodv_crossing(&self, t: f64, dod: f64, floor: f64) -> Option<u64> {
        first_below(|c| self.eodv_at(t, dod, c), self.eodv_coeff_cycle, floor, 0, None)
    }
}

/// Smallest integer cycle in `[start, end]` with `f(c) < floor`, where `f`
/// is affine with decreasing slope `loss_rate` on that interval.
///
/// The crossing comes from the closed-form solve; the two fix-up loops only
/// absorb floating-point rounding at the boundary so the answer agrees with
/// evaluating `f` cycle by cycle.
fn first_below(
    f: impl Fn(f64) -> f64,
    loss_rate: f64,
    floor: f64,
    start: u64,
    end: Option<u64>,
) -> Option<u64> {
    let in_range = |c: u64| end.is_none_or(|e| c <= e);
    if f(start as f64) < floor {
        return Some(start);
    }
    if !(loss_rate > 0.0) {
        return None;
    }
    let offset = ((f(start as f64) - floor) / loss_rate).floor();
    if !offset.is_finite() || offset >= u64::MAX as f64 / 2.0 {
        return None;
    }
    let mut c = start + offset as u64 + 1;
    while c > start && f((c - 1) as f64) < floor {
        c -= 1;
    }
    while f(c as f64) >= floor {
        c += 1;
    }
    in_range(c).then_some(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FailureCriterion {
    Rc,
    Eodv,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum CycleLife {
    Fails {
        cycle: u32,
        criterion: FailureCriterion,
    },
    NoFailure {
        horizon: u32,
    },
}

impl CycleLife {
    pub fn from_crossings(rc: Option<u64>, eodv: Option<u64>, horizon: u32) -> Self {
        let within = |c: Option<u64>| c.filter(|&c| c <= horizon as u64);
        match (within(rc), within(eodv)) {
            (None, None) => CycleLife::NoFailure { horizon },
            (Some(r), None) => CycleLife::fails(r, FailureCriterion::Rc),
            (None, Some(e)) => CycleLife::fails(e, FailureCriterion::Eodv),
            (Some(r), Some(e)) if r < e => CycleLife::fails(r, FailureCriterion::Rc),
            (Some(r), Some(e)) if e < r => CycleLife::fails(e, FailureCriterion::Eodv),
            (Some(r), Some(_)) => CycleLife::fails(r, FailureCriterion::Both),
        }
    }

    fn fails(cycle: u64, criterion: FailureCriterion) -> Self {
        CycleLife::Fails {
            cycle: cycle as u32,
            criterion,
        }
    }

    pub fn cycle(&self) -> Option<u32> {
        match self {
            CycleLife::Fails { cycle, .. } => Some(*cycle),
            CycleLife::NoFailure { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationPlan {
    pub settings: Vec<(f64, f64)>,
    pub cycle_start: u32,
    pub cycle_end: u32,
    pub cycle_step: u32,
    pub noise_sd_rc: f64,
    pub noise_sd_eodv: f64,
    pub seed: u64,
}

impl Default for SimulationPlan {
    /// Reference grid: six settings, cycles 0..=25000 every 1000, no noise.
    fn default() -> Self {
        Self {
            settings: REFERENCE_SETTINGS.to_vec(),
            cycle_start: 0,
            cycle_end: 25_000,
            cycle_step: 1_000,
            noise_sd_rc: 0.0,
            noise_sd_eodv: 0.0,
            seed: 0,
        }
    }
}

const PLAN_KEYS: [&str; 7] = [
    "settings",
    "cycle_start",
    "cycle_end",
    "cycle_step",
    "noise_sd_rc",
    "noise_sd_eodv",
    "seed",
];

impl SimulationPlan {
    pub fn validate(&self) -> Result<()> {
        if self.cycle_step == 0 {
            return Err(Error::Invalid("cycle_step must be positive".into()));
        }
        if self.cycle_end < self.cycle_start {
            return Err(Error::Invalid(format!(
                "cycle_end ({}) is before cycle_start ({})",
                self.cycle_end, self.cycle_start
            )));
        }
        for (name, sd) in [("noise_sd_rc", self.noise_sd_rc), ("noise_sd_eodv", self.noise_sd_eodv)] {
            if !(sd >= 0.0 && sd.is_finite()) {
                return Err(Error::Invalid(format!("{name} must be a finite value >= 0, got {sd}")));
            }
        }
        for &(t, d) in &self.settings {
            finite(t, "setting temperature")?;
            finite(d, "setting DOD")?;
        }
        Ok(())
    }

    pub fn cycles(&self) -> impl Iterator<Item = u32> {
        (self.cycle_start..=self.cycle_end).step_by(self.cycle_step.max(1) as usize)
    }

    /// One record per (setting, cycle). Setting `i` draws its noise from
    /// `SplitMix64::substream(seed, i)`, one RC sample then one EODV sample
    /// per cycle in ascending order.
    pub fn generate(&self, params: &DegradationModelParams) -> Result<CyclingDataset> {
        self.validate()?;
        params.validate()?;
        let mut records = Vec::with_capacity(self.settings.len() * self.cycles().count());
        for (i, &(t, dod)) in self.settings.iter().enumerate() {
            let mut rng = SplitMix64::substream(self.seed, i as u64);
            for cycle in self.cycles() {
                let rc = params.eval_rc(t, dod, cycle) + self.noise_sd_rc * rng.standard_normal();
                let eodv =
                    params.eval_eodv(t, dod, cycle) + self.noise_sd_eodv * rng.standard_normal();
                records.push(CyclingRecord::new(t, dod, cycle).with_rc(rc).with_eodv(eodv));
            }
        }
        CyclingDataset::new(records, format!("simulated seed={}", self.seed))
    }

    pub fn apply_kv(&mut self, kv: &KeyValues) -> Result<()> {
        if let Some(s) = kv.get_str("settings") {
            self.settings = parse_settings(s)?;
        }
        if let Some(v) = kv.get("cycle_start")? {
            self.cycle_start = v;
        }
        if let Some(v) = kv.get("cycle_end")? {
            self.cycle_end = v;
        }
        if let Some(v) = kv.get("cycle_step")? {
            self.cycle_step = v;
        }
        if let Some(v) = kv.get("noise_sd_rc")? {
            self.noise_sd_rc = v;
        }
        if let Some(v) = kv.get("noise_sd_eodv")? {
            self.noise_sd_eodv = v;
        }
        if let Some(v) = kv.get("seed")? {
            self.seed = v;
        }
        Ok(())
    }

    pub fn write_kv(&self, w: &mut KvWriter) {
        w.entry("settings", format_settings(&self.settings))
            .entry("cycle_start", self.cycle_start)
            .entry("cycle_end", self.cycle_end)
            .entry("cycle_step", self.cycle_step)
            .num("noise_sd_rc", self.noise_sd_rc)
            .num("noise_sd_eodv", self.noise_sd_eodv)
            .entry("seed", self.seed);
    }

    pub fn keys() -> &'static [&'static str] {
        &PLAN_KEYS
    }
}

/// Parses `"10:10 10:20 20:20"` (also accepts commas as separators).
pub fn parse_settings(text: &str) -> Result<Vec<(f64, f64)>> {
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(parse_setting)
        .collect()
}

pub fn parse_setting(token: &str) -> Result<(f64, f64)> {
    let bad = || Error::Invalid(format!("setting `{token}` is not TEMP:DOD"));
    let (t, d) = token.split_once(':').ok_or_else(bad)?;
    Ok((t.trim().parse().map_err(|_| bad())?, d.trim().parse().map_err(|_| bad())?))
}

pub fn format_settings(settings: &[(f64, f64)]) -> String {
    settings
        .iter()
        .map(|(t, d)| format!("{}:{}", crate::kv::fmt_num(*t), crate::kv::fmt_num(*d)))
        .collect::<Vec<_>>()
        .join(" ")
}
