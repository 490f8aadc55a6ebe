use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, TimeZone, Utc};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Poisson, WeightedIndex};

use crate::cdr::{CdrRecord, Dataset, Direction, Label, LabelTable, Service};
use crate::rngs::stream;

use super::world::{shift_for, GroundTruth, MigrationSchedule, ShiftWindow};
use super::{ScenarioConfig, SynthError};

// purpose tags for derived RNG streams
const TAG_PROFILE: u64 = 1;
const TAG_SHARE: u64 = 2;
const TAG_SITES: u64 = 3;
const TAG_FAMILY: u64 = 4;
const TAG_SUB_TRAFFIC: u64 = 5;
const TAG_INTL: u64 = 6;
const TAG_MIMIC: u64 = 7;
const TAG_CLONE: u64 = 8;

/// All worlds start here; the scenario only chooses the length.
fn base_date() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).single().expect("fixed base date")
}

/// Counterparty id stamped on data sessions (there is no peer SIM).
const DATA_PEER: &str = "NET";

/// Share of adjacent subscriber pairs living on one device, the benign
/// source of imsi_per_imei = 2.
const DEVICE_SHARE_PROB: f64 = 0.15;

/// Share of subscribers on cheap handsets with recycled (cloned) IMEIs;
/// a handful of clone values circulate network-wide, so a benign IMEI can
/// legitimately host many IMSIs.
const CLONED_IMEI_PROB: f64 = 0.02;

/// One clone IMEI value circulates per this many subscribers.
const SUBSCRIBERS_PER_CLONE_IMEI: usize = 400;

/// Radio channels per box: four SIMs multiplex one IMEI.
fn pool_size(sims_per_box: u32) -> usize {
    (sims_per_box as usize).div_ceil(4)
}

// duration models, seconds (log-normal medians per scenario defaults)
const SUB_VOICE_MEDIAN: f64 = 90.0;
const BYPASS_VOICE_MEDIAN: f64 = 180.0;
const MIMIC_VOICE_MEDIAN: f64 = 60.0;
const DATA_SESSION_MEDIAN: f64 = 300.0;
const MAX_DURATION: f64 = 14_400.0;

fn lognormal_duration(rng: &mut ChaCha8Rng, median: f64, sigma: f64) -> u32 {
    let d = LogNormal::new(median.ln(), sigma).expect("valid log-normal");
    d.sample(rng).clamp(1.0, MAX_DURATION).round() as u32
}

fn poisson_count(rng: &mut ChaCha8Rng, rate: f64) -> u64 {
    if rate <= 0.0 {
        return 0;
    }
    Poisson::new(rate).expect("positive rate").sample(rng) as u64
}

/// Subscriber clock-hour profile: quiet nights, busy 08:00-23:00.
fn diurnal_hour(rng: &mut ChaCha8Rng, weights: &WeightedIndex<f64>) -> u32 {
    weights.sample(rng) as u32
}

fn diurnal_weights() -> WeightedIndex<f64> {
    let mut w = vec![0.15; 24];
    w[6..8].fill(0.5);
    w[8..23].fill(1.0);
    w[23] = 0.4;
    WeightedIndex::new(w).expect("positive weights")
}

struct Subscriber {
    sim_id: String,
    imei: String,
    imsi: String,
    home_cells: Vec<String>,
    peers: Vec<usize>,
    mo_rate: f64,
    sms_rate: f64,
    data_rate: f64,
}

struct FraudSim {
    sim_id: String,
    imsi: String,
    home_box: usize,
    shift: Option<ShiftWindow>,
}

struct Emitter {
    records: Vec<CdrRecord>,
    next_id: u64,
    /// Events stamped per subscriber so far; the first two events of a
    /// subscriber are pinned to its first two home cells so every active
    /// subscriber shows movement.
    sub_event_counts: Vec<u64>,
    fraud_channel_counts: Vec<u64>,
}

impl Emitter {
    fn next_record_id(&mut self) -> String {
        let id = format!("R{:08}", self.next_id);
        self.next_id += 1;
        id
    }

    fn sub_cell(&mut self, sub: &Subscriber, index: usize, rng: &mut ChaCha8Rng) -> String {
        let count = self.sub_event_counts[index];
        self.sub_event_counts[index] += 1;
        let cells = &sub.home_cells;
        let pick = match count {
            0 => 0,
            1 => 1 % cells.len(),
            _ => {
                // roughly 0.4 / 0.3 / 0.2 / 0.1 across the home cells
                let r = rng.gen_range(0..10);
                let idx = if r < 4 {
                    0
                } else if r < 7 {
                    1
                } else if r < 9 {
                    2
                } else {
                    3
                };
                idx.min(cells.len() - 1)
            }
        };
        cells[pick].clone()
    }

    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        timestamp: DateTime<Utc>,
        sim_id: &str,
        imei: &str,
        imsi: &str,
        peer_id: &str,
        cell_id: &str,
        direction: Direction,
        service: Service,
        duration_sec: u32,
        peer_is_international: bool,
    ) {
        let record_id = self.next_record_id();
        self.records.push(CdrRecord {
            record_id,
            timestamp,
            sim_id: sim_id.to_string(),
            imei: imei.to_string(),
            imsi: imsi.to_string(),
            peer_id: peer_id.to_string(),
            cell_id: cell_id.to_string(),
            direction,
            service,
            duration_sec,
            peer_is_international,
        });
    }
}

fn sample_distinct(rng: &mut ChaCha8Rng, k: usize, n: usize, exclude: Option<usize>) -> Vec<usize> {
    let mut chosen = Vec::with_capacity(k);
    while chosen.len() < k {
        let cand = rng.gen_range(0..n);
        if Some(cand) != exclude && !chosen.contains(&cand) {
            chosen.push(cand);
        }
    }
    chosen
}

/// Fixed callee lists, one per fraud SIM, drawn from the subscriber
/// population. Lists may overlap freely.
pub fn assign_families(
    cfg: &ScenarioConfig,
    fraud_sim_ids: &[String],
    subscriber_ids: &[String],
) -> Result<BTreeMap<String, BTreeSet<String>>, SynthError> {
    if cfg.hbs.family_size as usize > subscriber_ids.len() {
        return Err(SynthError::Config(vec![format!(
            "hbs.family_size: {} exceeds the {} subscribers available",
            cfg.hbs.family_size,
            subscriber_ids.len()
        )]));
    }
    let mut families = BTreeMap::new();
    for (g, sim) in fraud_sim_ids.iter().enumerate() {
        let mut rng = stream(cfg.seed, TAG_FAMILY, g as u64);
        let members = sample_distinct(
            &mut rng,
            cfg.hbs.family_size as usize,
            subscriber_ids.len(),
            None,
        );
        families.insert(
            sim.clone(),
            members.iter().map(|&i| subscriber_ids[i].clone()).collect(),
        );
    }
    Ok(families)
}

/// Deterministic world synthesis; same config, same bytes.
pub fn generate(cfg: &ScenarioConfig) -> Result<(Dataset, GroundTruth), SynthError> {
    cfg.validate()?;

    let start = base_date();
    let end = start + chrono::Duration::days(i64::from(cfg.days));
    let n_subs = cfg.n_subscribers as usize;
    let n_cells = cfg.cells as usize;
    let cell_ids: Vec<String> = (0..n_cells).map(|c| format!("C{c:04}")).collect();

    // -- population ------------------------------------------------------
    let mut subscribers: Vec<Subscriber> = (0..n_subs)
        .map(|i| {
            let mut rng = stream(cfg.seed, TAG_PROFILE, i as u64);
            let k = rng.gen_range(2..=4).min(n_cells);
            let home = sample_distinct(&mut rng, k, n_cells, None);
            let n_peers = rng.gen_range(4..=10).min(n_subs.saturating_sub(1));
            let peers = sample_distinct(&mut rng, n_peers, n_subs, Some(i));
            Subscriber {
                sim_id: format!("S{i:05}"),
                imei: format!("DS{i:05}"),
                imsi: format!("IS{i:05}"),
                home_cells: home.iter().map(|&c| cell_ids[c].clone()).collect(),
                peers,
                mo_rate: rng.gen_range(2.0..6.0),
                sms_rate: rng.gen_range(0.5..3.0),
                data_rate: rng.gen_range(0.3..2.0),
            }
        })
        .collect();
    // benign device sharing: some adjacent pairs use one handset
    for i in (0..n_subs.saturating_sub(1)).step_by(2) {
        let mut rng = stream(cfg.seed, TAG_SHARE, i as u64);
        if rng.gen_bool(DEVICE_SHARE_PROB) {
            subscribers[i + 1].imei = subscribers[i].imei.clone();
        }
    }
    // recycled IMEIs: a few clone values spread across unrelated users
    let n_clone_imeis = (n_subs / SUBSCRIBERS_PER_CLONE_IMEI).max(1);
    for (i, sub) in subscribers.iter_mut().enumerate() {
        let mut rng = stream(cfg.seed, TAG_CLONE, i as u64);
        if rng.gen_bool(CLONED_IMEI_PROB) {
            sub.imei = format!("DX{:03}", rng.gen_range(0..n_clone_imeis));
        }
    }

    // -- simbox fleet ------------------------------------------------------
    let n_boxes = cfg.n_simboxes as usize;
    let per_box = cfg.sims_per_box as usize;
    let mut site_rng = stream(cfg.seed, TAG_SITES, 0);
    let mut site_cells: Vec<usize> = (0..n_cells).collect();
    for i in (1..site_cells.len()).rev() {
        let j = site_rng.gen_range(0..=i);
        site_cells.swap(i, j);
    }
    let box_sites: Vec<String> = (0..n_boxes).map(|b| cell_ids[site_cells[b]].clone()).collect();
    let box_imei_pools: Vec<Vec<String>> = (0..n_boxes)
        .map(|b| {
            (0..pool_size(cfg.sims_per_box))
                .map(|c| format!("DB{b:02}C{c:02}"))
                .collect()
        })
        .collect();

    let fraud_sims: Vec<FraudSim> = (0..n_boxes)
        .flat_map(|b| (0..per_box).map(move |s| (b, s)))
        .enumerate()
        .map(|(g, (b, s))| FraudSim {
            sim_id: format!("F{b:02}X{s:02}"),
            imsi: format!("IF{b:02}X{s:02}"),
            home_box: b,
            shift: cfg.hbs.rotation.then(|| shift_for(cfg.hbs.shift_hours, g)),
        })
        .collect();
    let fraud_ids: Vec<String> = fraud_sims.iter().map(|f| f.sim_id.clone()).collect();
    let sub_ids: Vec<String> = subscribers.iter().map(|s| s.sim_id.clone()).collect();

    let families = if cfg.hbs.family_lists && !fraud_sims.is_empty() {
        assign_families(cfg, &fraud_ids, &sub_ids)?
    } else {
        BTreeMap::new()
    };
    let family_vecs: Vec<Vec<usize>> = fraud_sims
        .iter()
        .map(|f| {
            families
                .get(&f.sim_id)
                .map(|set| {
                    set.iter()
                        .map(|sid| sid[1..].parse::<usize>().expect("subscriber id"))
                        .collect()
                })
                .unwrap_or_default()
        })
        .collect();

    let migration = MigrationSchedule::from_config(cfg);
    let weights = diurnal_weights();

    let mut em = Emitter {
        records: Vec::new(),
        next_id: 0,
        sub_event_counts: vec![0; n_subs],
        fraud_channel_counts: vec![0; fraud_sims.len()],
    };

    // effective site of fraud sim g at time t -> (cell, imei)
    let site_of = |em: &mut Emitter, g: usize, t: DateTime<Utc>| -> (String, String) {
        let eff = migration.site_at(fraud_sims[g].home_box, start, t);
        let pool = &box_imei_pools[eff];
        let ch = (em.fraud_channel_counts[g] as usize + g) % pool.len();
        em.fraud_channel_counts[g] += 1;
        (box_sites[eff].clone(), pool[ch].clone())
    };

    // -- subscriber background traffic ------------------------------------
    for (i, sub) in subscribers.iter().enumerate() {
        let mut rng = stream(cfg.seed, TAG_SUB_TRAFFIC, i as u64);
        for day in 0..cfg.days {
            let day_start = start + chrono::Duration::days(i64::from(day));
            let stamp = |rng: &mut ChaCha8Rng, weights: &WeightedIndex<f64>| {
                let hour = diurnal_hour(rng, weights);
                day_start
                    + chrono::Duration::seconds(i64::from(hour) * 3600 + rng.gen_range(0..3600))
            };

            for _ in 0..poisson_count(&mut rng, sub.mo_rate) {
                if sub.peers.is_empty() {
                    break; // a lone subscriber has nobody to call
                }
                let t = stamp(&mut rng, &weights);
                let callee = sub.peers[rng.gen_range(0..sub.peers.len())];
                let dur = lognormal_duration(&mut rng, SUB_VOICE_MEDIAN, 0.9);
                let cell = em.sub_cell(sub, i, &mut rng);
                em.push(
                    t, &sub.sim_id, &sub.imei, &sub.imsi, &subscribers[callee].sim_id, &cell,
                    Direction::Mo, Service::Voice, dur, false,
                );
                let peer = &subscribers[callee];
                let peer_cell = em.sub_cell(peer, callee, &mut rng);
                em.push(
                    t, &peer.sim_id, &peer.imei, &peer.imsi, &sub.sim_id, &peer_cell,
                    Direction::Mt, Service::Voice, dur, false,
                );
            }
            for _ in 0..poisson_count(&mut rng, sub.sms_rate) {
                if sub.peers.is_empty() {
                    break;
                }
                let t = stamp(&mut rng, &weights);
                let callee = sub.peers[rng.gen_range(0..sub.peers.len())];
                let cell = em.sub_cell(sub, i, &mut rng);
                em.push(
                    t, &sub.sim_id, &sub.imei, &sub.imsi, &subscribers[callee].sim_id, &cell,
                    Direction::Mo, Service::Sms, 0, false,
                );
                let peer = &subscribers[callee];
                let peer_cell = em.sub_cell(peer, callee, &mut rng);
                em.push(
                    t, &peer.sim_id, &peer.imei, &peer.imsi, &sub.sim_id, &peer_cell,
                    Direction::Mt, Service::Sms, 0, false,
                );
            }
            for _ in 0..poisson_count(&mut rng, sub.data_rate) {
                let t = stamp(&mut rng, &weights);
                let dur = lognormal_duration(&mut rng, DATA_SESSION_MEDIAN, 1.0);
                let cell = em.sub_cell(sub, i, &mut rng);
                em.push(
                    t, &sub.sim_id, &sub.imei, &sub.imsi, DATA_PEER, &cell,
                    Direction::Mo, Service::Data, dur, false,
                );
            }
        }
    }

    // -- inbound international calls ---------------------------------------
    for (i, sub) in subscribers.iter().enumerate() {
        let mut rng = stream(cfg.seed, TAG_INTL, i as u64);
        for day in 0..cfg.days {
            let day_start = start + chrono::Duration::days(i64::from(day));
            for _ in 0..poisson_count(&mut rng, cfg.intl_call_rate) {
                // international arrivals are timezone-smeared: uniform clock
                let t = day_start + chrono::Duration::seconds(rng.gen_range(0..86_400));
                let bypass = cfg.bypass_fraction > 0.0 && rng.gen_bool(cfg.bypass_fraction);
                let active: Vec<usize> = if bypass {
                    let hour = super::world::hour_of_day(t);
                    fraud_sims
                        .iter()
                        .enumerate()
                        .filter(|(_, f)| f.shift.is_none_or(|s| s.contains(hour)))
                        .map(|(g, _)| g)
                        .collect()
                } else {
                    Vec::new()
                };

                if bypass && !active.is_empty() {
                    let g = active[rng.gen_range(0..active.len())];
                    let fraud = &fraud_sims[g];
                    // family lists pin the terminating subscriber
                    let callee = if family_vecs[g].is_empty() {
                        i
                    } else {
                        family_vecs[g][rng.gen_range(0..family_vecs[g].len())]
                    };
                    let dur = lognormal_duration(&mut rng, BYPASS_VOICE_MEDIAN, 0.9);
                    let (cell, imei) = site_of(&mut em, g, t);
                    let peer = &subscribers[callee];
                    // the call turns local: nothing international on either leg
                    em.push(
                        t, &fraud.sim_id, &imei, &fraud.imsi, &peer.sim_id, &cell,
                        Direction::Mo, Service::Voice, dur, false,
                    );
                    let peer_cell = em.sub_cell(peer, callee, &mut rng);
                    em.push(
                        t, &peer.sim_id, &peer.imei, &peer.imsi, &fraud.sim_id, &peer_cell,
                        Direction::Mt, Service::Voice, dur, false,
                    );
                } else {
                    let intl_peer = format!("INTL{:06}", rng.gen_range(0..1_000_000));
                    let dur = lognormal_duration(&mut rng, SUB_VOICE_MEDIAN, 0.9);
                    let cell = em.sub_cell(sub, i, &mut rng);
                    em.push(
                        t, &sub.sim_id, &sub.imei, &sub.imsi, &intl_peer, &cell,
                        Direction::Mt, Service::Voice, dur, true,
                    );
                }
            }
        }
    }

    // -- service mimicry ---------------------------------------------------
    if cfg.hbs.service_mimicry {
        let mimic = mimic_records(cfg, &fraud_sims, &box_sites, &box_imei_pools, &migration, start, &mut em);
        em.records.extend(mimic);
    }

    // -- ground truth -------------------------------------------------------
    let mut labels = LabelTable::new();
    for s in &subscribers {
        labels.insert(s.sim_id.clone(), Label::Normal);
    }
    for f in &fraud_sims {
        labels.insert(f.sim_id.clone(), Label::Fraud);
    }
    let truth = GroundTruth {
        labels,
        box_assignment: fraud_sims
            .iter()
            .map(|f| (f.sim_id.clone(), f.home_box))
            .collect(),
        family_assignment: families,
        shift_assignment: fraud_sims
            .iter()
            .filter_map(|f| f.shift.map(|s| (f.sim_id.clone(), s)))
            .collect(),
        box_sites,
        box_imei_pools,
    };

    let records = std::mem::take(&mut em.records);
    Ok((Dataset::new(records, start, end), truth))
}

/// SMS and short calls exchanged inside the fleet, plus the occasional
/// data session, so fraud SIMs stop looking voice-only. Peer events are
/// recorded on both legs at the same instant.
fn mimic_records(
    cfg: &ScenarioConfig,
    fraud_sims: &[FraudSim],
    box_sites: &[String],
    box_imei_pools: &[Vec<String>],
    migration: &MigrationSchedule,
    start: DateTime<Utc>,
    em: &mut Emitter,
) -> Vec<CdrRecord> {
    let weights = diurnal_weights();
    let mut out = Vec::new();
    for (g, fraud) in fraud_sims.iter().enumerate() {
        // partners share the shift so both ends are active: same box
        // preferred, then anywhere in the fleet
        let same_slot = |other: &FraudSim| other.shift == fraud.shift;
        let mut partners: Vec<usize> = fraud_sims
            .iter()
            .enumerate()
            .filter(|(o, f)| *o != g && f.home_box == fraud.home_box && same_slot(f))
            .map(|(o, _)| o)
            .collect();
        if partners.is_empty() {
            partners = fraud_sims
                .iter()
                .enumerate()
                .filter(|(o, f)| *o != g && same_slot(f))
                .map(|(o, _)| o)
                .collect();
        }
        if partners.is_empty() {
            continue;
        }

        let mut rng = stream(cfg.seed, TAG_MIMIC, g as u64);
        for day in 0..cfg.days {
            let day_start = start + chrono::Duration::days(i64::from(day));
            for _ in 0..poisson_count(&mut rng, cfg.hbs.mimic_events_per_day) {
                let partner_idx = partners[rng.gen_range(0..partners.len())];
                let partner = &fraud_sims[partner_idx];
                let second = match fraud.shift {
                    Some(s) => {
                        let len = ((s.end_hour - s.start_hour) * 3600.0) as i64;
                        (s.start_hour * 3600.0) as i64 + rng.gen_range(0..len.max(1))
                    }
                    None => {
                        i64::from(diurnal_hour(&mut rng, &weights)) * 3600 + rng.gen_range(0..3600)
                    }
                };
                let t = day_start + chrono::Duration::seconds(second);
                // half sms, a third short calls, the rest data sessions
                let kind = rng.gen_range(0..100u32);
                if kind >= 85 {
                    // data session, no peer leg
                    let eff_g = migration.site_at(fraud.home_box, start, t);
                    let ch_g =
                        (em.fraud_channel_counts[g] as usize + g) % box_imei_pools[eff_g].len();
                    em.fraud_channel_counts[g] += 1;
                    let id = em.next_record_id();
                    out.push(CdrRecord {
                        record_id: id,
                        timestamp: t,
                        sim_id: fraud.sim_id.clone(),
                        imei: box_imei_pools[eff_g][ch_g].clone(),
                        imsi: fraud.imsi.clone(),
                        peer_id: DATA_PEER.to_string(),
                        cell_id: box_sites[eff_g].clone(),
                        direction: Direction::Mo,
                        service: Service::Data,
                        duration_sec: lognormal_duration(&mut rng, DATA_SESSION_MEDIAN, 1.0),
                        peer_is_international: false,
                    });
                    continue;
                }
                let (service, dur) = if kind < 50 {
                    (Service::Sms, 0)
                } else {
                    (Service::Voice, lognormal_duration(&mut rng, MIMIC_VOICE_MEDIAN, 0.7))
                };

                let eff_g = migration.site_at(fraud.home_box, start, t);
                let eff_p = migration.site_at(partner.home_box, start, t);
                let ch_g = (em.fraud_channel_counts[g] as usize + g) % box_imei_pools[eff_g].len();
                em.fraud_channel_counts[g] += 1;
                let ch_p = (em.fraud_channel_counts[partner_idx] as usize + partner_idx)
                    % box_imei_pools[eff_p].len();
                em.fraud_channel_counts[partner_idx] += 1;

                let mo_id = em.next_record_id();
                out.push(CdrRecord {
                    record_id: mo_id,
                    timestamp: t,
                    sim_id: fraud.sim_id.clone(),
                    imei: box_imei_pools[eff_g][ch_g].clone(),
                    imsi: fraud.imsi.clone(),
                    peer_id: partner.sim_id.clone(),
                    cell_id: box_sites[eff_g].clone(),
                    direction: Direction::Mo,
                    service,
                    duration_sec: dur,
                    peer_is_international: false,
                });
                let mt_id = em.next_record_id();
                out.push(CdrRecord {
                    record_id: mt_id,
                    timestamp: t,
                    sim_id: partner.sim_id.clone(),
                    imei: box_imei_pools[eff_p][ch_p].clone(),
                    imsi: partner.imsi.clone(),
                    peer_id: fraud.sim_id.clone(),
                    cell_id: box_sites[eff_p].clone(),
                    direction: Direction::Mt,
                    service,
                    duration_sec: dur,
                    peer_is_international: false,
                });
            }
        }
    }
    out
}
