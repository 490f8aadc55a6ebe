use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::cdr::LabelTable;

use super::ScenarioConfig;

/// Daily activity window of a rotated fraud SIM, in fractional UTC hours.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftWindow {
    pub start_hour: f64,
    pub end_hour: f64,
}

impl ShiftWindow {
    pub fn contains(&self, hour: f64) -> bool {
        hour >= self.start_hour && hour < self.end_hour
    }
}

/// sim_id -> daily shift; empty when rotation is off.
pub type ShiftTable = BTreeMap<String, ShiftWindow>;

/// Everything the generator knows that a detector must not see.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub labels: LabelTable,
    /// Fraud sim -> home simbox index. Normal sims never appear.
    pub box_assignment: BTreeMap<String, usize>,
    /// Fraud sim -> its fixed callee set (family lists only).
    pub family_assignment: BTreeMap<String, BTreeSet<String>>,
    /// Fraud sim -> daily shift (rotation only).
    pub shift_assignment: ShiftTable,
    /// Site cell of each simbox, by box index.
    pub box_sites: Vec<String>,
    /// Radio-channel IMEI pool of each simbox, by box index.
    pub box_imei_pools: Vec<Vec<String>>,
}

impl GroundTruth {
    pub fn fraud_sims(&self) -> Vec<&String> {
        self.labels
            .iter()
            .filter(|(_, l)| **l == crate::cdr::Label::Fraud)
            .map(|(s, _)| s)
            .collect()
    }

    /// Active = inside its shift (or always, without rotation).
    pub fn sim_active_at(&self, sim: &str, t: DateTime<Utc>) -> bool {
        match self.shift_assignment.get(sim) {
            None => true,
            Some(shift) => shift.contains(hour_of_day(t)),
        }
    }
}

pub fn hour_of_day(t: DateTime<Utc>) -> f64 {
    use chrono::Timelike;
    t.time().num_seconds_from_midnight() as f64 / 3600.0
}

/// Site rotation under SIM migration: at every swap epoch each fraud SIM
/// moves to the next gateway site, so the fleet exchanges sites in
/// lockstep.
#[derive(Debug, Clone, Copy)]
pub struct MigrationSchedule {
    enabled: bool,
    swap_period_hours: f64,
    n_boxes: usize,
}

impl MigrationSchedule {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        MigrationSchedule {
            enabled: cfg.hbs.migration && cfg.n_simboxes >= 2,
            swap_period_hours: cfg.hbs.swap_period_hours,
            n_boxes: cfg.n_simboxes as usize,
        }
    }

    /// Which site a SIM homed at `home_box` occupies at time `t`.
    pub fn site_at(&self, home_box: usize, window_start: DateTime<Utc>, t: DateTime<Utc>) -> usize {
        if !self.enabled {
            return home_box;
        }
        let hours = (t - window_start).num_seconds() as f64 / 3600.0;
        let epoch = (hours / self.swap_period_hours).floor().max(0.0) as usize;
        (home_box + epoch) % self.n_boxes
    }
}

/// Round-robin daily shifts over floor(24 / shift_hours) slots.
pub fn shift_for(shift_hours: f64, fraud_index: usize) -> ShiftWindow {
    let slots = (24.0 / shift_hours).floor().max(1.0) as usize;
    let slot = fraud_index % slots;
    let start_hour = slot as f64 * shift_hours;
    ShiftWindow {
        start_hour,
        end_hour: start_hour + shift_hours,
    }
}
