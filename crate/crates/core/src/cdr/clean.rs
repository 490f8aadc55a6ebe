use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::schema::Dataset;

/// Counts of records removed (or columns stripped) by stage-1 cleaning.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanStats {
    /// Records dropped because a required field was empty.
    pub missing: u64,
    /// Records dropped as duplicates of an earlier record_id.
    pub duplicates: u64,
    /// Extra columns stripped at parse time (set by the caller that owns
    /// the parse report; cleaning itself never sees them).
    pub extra_columns: u64,
}

/// Removes records with empty required fields, then duplicate record_ids
/// (keeping the first occurrence in sort order). Total: never fails, and
/// `clean(clean(d)) == clean(d)`.
pub fn clean(d: &Dataset) -> (Dataset, CleanStats) {
    let mut stats = CleanStats::default();
    let mut seen = HashSet::with_capacity(d.len());
    let mut kept = Vec::with_capacity(d.len());

    for r in d.records() {
        let missing_field = r.record_id.is_empty()
            || r.sim_id.is_empty()
            || r.imei.is_empty()
            || r.imsi.is_empty()
            || r.peer_id.is_empty()
            || r.cell_id.is_empty();
        if missing_field {
            stats.missing += 1;
            continue;
        }
        if !seen.insert(r.record_id.clone()) {
            stats.duplicates += 1;
            continue;
        }
        kept.push(r.clone());
    }

    (
        Dataset::new(kept, d.window_start, d.window_end),
        stats,
    )
}
