use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SynthError;

/// Evasion behavior switches. Each sub-parameter is validated only when
/// its switch is on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HbsConfig {
    /// Swap fraud SIMs between gateway sites on a fixed period.
    pub migration: bool,
    pub swap_period_hours: f64,
    /// Limit each fraud SIM to one contiguous daily shift.
    pub rotation: bool,
    pub shift_hours: f64,
    /// Fraud SIMs exchange SMS / short calls with each other.
    pub service_mimicry: bool,
    pub mimic_events_per_day: f64,
    /// Pin each fraud SIM's callees to a fixed subscriber list.
    pub family_lists: bool,
    pub family_size: u32,
}

impl Default for HbsConfig {
    fn default() -> Self {
        HbsConfig {
            migration: false,
            swap_period_hours: 24.0,
            rotation: false,
            shift_hours: 8.0,
            service_mimicry: false,
            mimic_events_per_day: 2.0,
            family_lists: false,
            family_size: 20,
        }
    }
}

impl HbsConfig {
    pub fn all_on() -> Self {
        HbsConfig {
            migration: true,
            rotation: true,
            service_mimicry: true,
            family_lists: true,
            ..HbsConfig::default()
        }
    }
}

/// Fraudster countermeasures against test-call probes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntiSpamConfig {
    pub enabled: bool,
    /// Probability a recognized probe is dropped before the box.
    pub block_prob: f64,
    /// Probability it is pushed onto the legitimate route instead.
    pub reroute_prob: f64,
}

impl Default for AntiSpamConfig {
    fn default() -> Self {
        AntiSpamConfig {
            enabled: false,
            block_prob: 0.0,
            reroute_prob: 0.0,
        }
    }
}

/// Generative description of one synthetic world.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub days: u32,
    pub n_subscribers: u32,
    /// Number of tower cells in the world.
    pub cells: u32,
    pub n_simboxes: u32,
    pub sims_per_box: u32,
    /// Expected international inbound calls per subscriber per day.
    pub intl_call_rate: f64,
    /// Share of international calls terminated through a SIMbox.
    pub bypass_fraction: f64,
    pub hbs: HbsConfig,
    pub antispam: AntiSpamConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            seed: 42,
            days: 7,
            n_subscribers: 100,
            cells: 20,
            n_simboxes: 0,
            sims_per_box: 8,
            intl_call_rate: 0.2,
            bypass_fraction: 0.7,
            hbs: HbsConfig::default(),
            antispam: AntiSpamConfig::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn n_fraud_sims(&self) -> u32 {
        self.n_simboxes * self.sims_per_box
    }

    /// Collects every violated constraint as a `key: message` line.
    pub fn validate(&self) -> Result<(), SynthError> {
        let mut violations = Vec::new();
        let mut bad = |key: &str, msg: String| violations.push(format!("{key}: {msg}"));

        if self.days == 0 {
            bad("days", "must be >= 1".into());
        }
        if self.n_subscribers == 0 {
            bad("n_subscribers", "must be >= 1".into());
        }
        if self.cells == 0 {
            bad("cells", "must be >= 1".into());
        }
        if self.n_simboxes > 0 {
            if self.sims_per_box == 0 {
                bad("sims_per_box", "must be >= 1 when simboxes exist".into());
            }
            if self.n_simboxes > self.cells {
                bad(
                    "n_simboxes",
                    format!(
                        "{} boxes need {} distinct site cells but cells = {}",
                        self.n_simboxes, self.n_simboxes, self.cells
                    ),
                );
            }
        }
        if !(self.intl_call_rate >= 0.0 && self.intl_call_rate.is_finite()) {
            bad("intl_call_rate", "must be a finite value >= 0".into());
        }
        if !(0.0..=1.0).contains(&self.bypass_fraction) {
            bad("bypass_fraction", "must lie in [0, 1]".into());
        }
        if self.hbs.migration {
            if !(self.hbs.swap_period_hours > 0.0 && self.hbs.swap_period_hours.is_finite()) {
                bad("hbs.swap_period_hours", "must be a finite value > 0".into());
            }
            if self.n_simboxes == 1 {
                bad(
                    "hbs.migration",
                    "needs at least 2 simbox sites to swap between".into(),
                );
            }
        }
        if self.hbs.rotation && !(self.hbs.shift_hours > 0.0 && self.hbs.shift_hours <= 24.0) {
            bad("hbs.shift_hours", "must lie in (0, 24]".into());
        }
        if self.hbs.service_mimicry
            && !(self.hbs.mimic_events_per_day >= 0.0 && self.hbs.mimic_events_per_day.is_finite())
        {
            bad("hbs.mimic_events_per_day", "must be a finite value >= 0".into());
        }
        if self.hbs.family_lists {
            if self.hbs.family_size == 0 {
                bad("hbs.family_size", "must be >= 1".into());
            }
            if self.hbs.family_size > self.n_subscribers {
                bad(
                    "hbs.family_size",
                    format!(
                        "{} exceeds the {} subscribers available",
                        self.hbs.family_size, self.n_subscribers
                    ),
                );
            }
        }
        if !(0.0..=1.0).contains(&self.antispam.block_prob) {
            bad("antispam.block_prob", "must lie in [0, 1]".into());
        }
        if !(0.0..=1.0).contains(&self.antispam.reroute_prob) {
            bad("antispam.reroute_prob", "must lie in [0, 1]".into());
        }
        if self.antispam.block_prob + self.antispam.reroute_prob > 1.0 {
            bad(
                "antispam.block_prob+antispam.reroute_prob",
                format!(
                    "sum {} exceeds 1",
                    self.antispam.block_prob + self.antispam.reroute_prob
                ),
            );
        }

        if violations.is_empty() {
            Ok(())
        } else {
            Err(SynthError::Config(violations))
        }
    }
}

/// Parses the flat `key=value` scenario format (one dotted key per line,
/// `#` comments allowed). Unspecified keys keep their defaults; unknown
/// keys and unparseable values are reported per key. The result is
/// validated before it is returned.
pub fn parse_scenario_str(content: &str) -> Result<ScenarioConfig, SynthError> {
    let mut cfg = ScenarioConfig::default();
    let mut violations = Vec::new();
    let mut seen: BTreeMap<&str, u32> = BTreeMap::new();

    for (idx, raw) in content.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            violations.push(format!("line {}: expected key=value, got {:?}", idx + 1, line));
            continue;
        };
        let key = key.trim();
        let value = value.trim();
        *seen.entry(key).or_default() += 1;

        macro_rules! set {
            ($field:expr, $ty:ty) => {
                match value.parse::<$ty>() {
                    Ok(v) => $field = v,
                    Err(_) => violations.push(format!(
                        "{key}: cannot parse {value:?} as {}",
                        stringify!($ty)
                    )),
                }
            };
        }

        match key {
            "seed" => set!(cfg.seed, u64),
            "days" => set!(cfg.days, u32),
            "n_subscribers" => set!(cfg.n_subscribers, u32),
            "cells" => set!(cfg.cells, u32),
            "n_simboxes" => set!(cfg.n_simboxes, u32),
            "sims_per_box" => set!(cfg.sims_per_box, u32),
            "intl_call_rate" => set!(cfg.intl_call_rate, f64),
            "bypass_fraction" => set!(cfg.bypass_fraction, f64),
            "hbs.migration" => set!(cfg.hbs.migration, bool),
            "hbs.swap_period_hours" => set!(cfg.hbs.swap_period_hours, f64),
            "hbs.rotation" => set!(cfg.hbs.rotation, bool),
            "hbs.shift_hours" => set!(cfg.hbs.shift_hours, f64),
            "hbs.service_mimicry" => set!(cfg.hbs.service_mimicry, bool),
            "hbs.mimic_events_per_day" => set!(cfg.hbs.mimic_events_per_day, f64),
            "hbs.family_lists" => set!(cfg.hbs.family_lists, bool),
            "hbs.family_size" => set!(cfg.hbs.family_size, u32),
            "antispam.enabled" => set!(cfg.antispam.enabled, bool),
            "antispam.block_prob" => set!(cfg.antispam.block_prob, f64),
            "antispam.reroute_prob" => set!(cfg.antispam.reroute_prob, f64),
            other => violations.push(format!("{other}: unknown key")),
        }
    }
    for (key, count) in seen {
        if count > 1 {
            violations.push(format!("{key}: specified {count} times"));
        }
    }

    if !violations.is_empty() {
        return Err(SynthError::Config(violations));
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_scenario_file(path: &Path) -> Result<ScenarioConfig, SynthError> {
    let content = std::fs::read_to_string(path).map_err(|source| SynthError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenario_str(&content)
}
