use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use chrono::{Datelike, Timelike};

use crate::cdr::{CdrRecord, Dataset, Direction, Service};

use super::FeatureMatrix;

/// Fixed column order of extracted usage profiles.
pub const FEATURE_NAMES: [&str; 15] = [
    "total_calls",
    "distinct_callees",
    "total_minutes",
    "avg_minutes",
    "outgoing_ratio",
    "incoming_calls",
    "sms_count",
    "data_sessions",
    "distinct_cells",
    "cell_entropy_bits",
    "imsi_per_imei",
    "night_ratio",
    "active_hours_per_day",
    "callee_repetition_ratio",
    "intl_presented_ratio",
];

pub const N_FEATURES: usize = FEATURE_NAMES.len();

/// Night window for `night_ratio`, UTC clock hours [0, 6).
const NIGHT_END_HOUR: u32 = 6;

#[derive(Default)]
struct SimAggregate {
    mo_voice: u64,
    mt_voice: u64,
    mt_voice_intl: u64,
    mo_voice_night: u64,
    mo_voice_seconds: u64,
    callees: HashSet<String>,
    sms: u64,
    data: u64,
    // BTreeMaps pin the float summation order in the entropy, keeping
    // extraction permutation-invariant
    cell_counts: BTreeMap<String, u64>,
    imei_counts: BTreeMap<String, u64>,
    // date -> distinct clock hours with at least one event
    hours_by_day: BTreeMap<i32, BTreeSet<u32>>,
}

impl SimAggregate {
    fn add(&mut self, r: &CdrRecord) {
        match (r.direction, r.service) {
            (Direction::Mo, Service::Voice) => {
                self.mo_voice += 1;
                self.mo_voice_seconds += u64::from(r.duration_sec);
                self.callees.insert(r.peer_id.clone());
                if r.timestamp.hour() < NIGHT_END_HOUR {
                    self.mo_voice_night += 1;
                }
            }
            (Direction::Mt, Service::Voice) => {
                self.mt_voice += 1;
                if r.peer_is_international {
                    self.mt_voice_intl += 1;
                }
            }
            (_, Service::Sms) => self.sms += 1,
            (_, Service::Data) => self.data += 1,
        }
        *self.cell_counts.entry(r.cell_id.clone()).or_default() += 1;
        *self.imei_counts.entry(r.imei.clone()).or_default() += 1;
        let day = r.timestamp.date_naive().num_days_from_ce();
        self.hours_by_day
            .entry(day)
            .or_default()
            .insert(r.timestamp.hour());
    }

    /// Most frequent IMEI; ties break to the lexicographically smallest.
    fn modal_imei(&self) -> Option<&str> {
        self.imei_counts
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
            .map(|(imei, _)| imei.as_str())
    }

    fn cell_entropy_bits(&self) -> f64 {
        let total: u64 = self.cell_counts.values().sum();
        if total == 0 || self.cell_counts.len() <= 1 {
            return 0.0;
        }
        let total = total as f64;
        -self
            .cell_counts
            .values()
            .map(|&c| {
                let p = c as f64 / total;
                p * p.log2()
            })
            .sum::<f64>()
    }

    fn active_hours_per_day(&self) -> f64 {
        if self.hours_by_day.is_empty() {
            return 0.0;
        }
        let total: usize = self.hours_by_day.values().map(BTreeSet::len).sum();
        total as f64 / self.hours_by_day.len() as f64
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Aggregates a cleaned dataset into one feature row per distinct sim_id,
/// rows ordered by sim_id. An empty dataset yields an empty matrix.
///
/// The result is permutation-invariant: record order never changes any
/// value.
pub fn extract(d: &Dataset) -> FeatureMatrix {
    // imei -> distinct imsi, dataset-wide (the SIMbox channel signature)
    let mut imsis_per_imei: HashMap<&str, HashSet<&str>> = HashMap::new();
    for r in d.records() {
        imsis_per_imei
            .entry(&r.imei)
            .or_default()
            .insert(&r.imsi);
    }

    let mut by_sim: BTreeMap<&str, SimAggregate> = BTreeMap::new();
    for r in d.records() {
        by_sim.entry(&r.sim_id).or_default().add(r);
    }

    let mut sim_ids = Vec::with_capacity(by_sim.len());
    let mut rows = Vec::with_capacity(by_sim.len());
    for (sim, agg) in &by_sim {
        let total_calls = agg.mo_voice;
        let distinct_callees = agg.callees.len() as u64;
        let total_minutes = agg.mo_voice_seconds as f64 / 60.0;
        let avg_minutes = if total_calls == 0 {
            0.0
        } else {
            total_minutes / total_calls as f64
        };
        let imsi_per_imei = agg
            .modal_imei()
            .and_then(|imei| imsis_per_imei.get(imei))
            .map_or(0.0, |s| s.len() as f64);
        let callee_repetition_ratio = if total_calls == 0 {
            0.0
        } else {
            1.0 - distinct_callees as f64 / total_calls as f64
        };
        rows.push(vec![
            total_calls as f64,
            distinct_callees as f64,
            total_minutes,
            avg_minutes,
            ratio(agg.mo_voice, agg.mo_voice + agg.mt_voice),
            agg.mt_voice as f64,
            agg.sms as f64,
            agg.data as f64,
            agg.cell_counts.len() as f64,
            agg.cell_entropy_bits(),
            imsi_per_imei,
            ratio(agg.mo_voice_night, agg.mo_voice),
            agg.active_hours_per_day(),
            callee_repetition_ratio,
            ratio(agg.mt_voice_intl, agg.mt_voice),
        ]);
        sim_ids.push(sim.to_string());
    }

    FeatureMatrix::new(
        sim_ids,
        FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        rows,
    )
}
