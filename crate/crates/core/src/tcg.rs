//! Simulated test-call-generation campaigns.
//!
//! An operator's fraud team places international probe calls to numbers
//! it owns and checks how the caller presents: a local caller id means
//! the call terminated through a SIMbox, identifying that SIM with
//! certainty. Fraudster anti-spam reduces exposure by blocking or
//! rerouting suspected probes before they reach the box.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::OnceLock;

use chrono::{DateTime, Utc};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cdr::{CdrRecord, Dataset, Direction, Label, Service};
use crate::learn::EvalReport;
use crate::rngs::stream;
use crate::synth::{GroundTruth, MigrationSchedule, ScenarioConfig};

const TAG_PROBE: u64 = 0x544347;

/// Duration stamped on probe call CDRs.
const PROBE_CALL_SEC: u32 = 20;

#[derive(Debug, Error)]
pub enum TcgError {
    #[error("invalid campaign: {0}")]
    InvalidCampaign(String),
    #[error("world has no fraud sims but bypass_fraction > 0")]
    NoFraudSims,
    #[error("world mismatch: campaign ran on {campaign} but model was trained on {model}")]
    WorldMismatch { campaign: String, model: String },
}

/// A generated world bundled with its ground truth and config.
#[derive(Debug, Clone)]
pub struct World {
    pub dataset: Dataset,
    pub truth: GroundTruth,
    pub config: ScenarioConfig,
    digest: OnceLock<String>,
}

impl World {
    pub fn new(dataset: Dataset, truth: GroundTruth, config: ScenarioConfig) -> Self {
        World {
            dataset,
            truth,
            config,
            digest: OnceLock::new(),
        }
    }

    /// SHA-256 of the canonical CSV, the world's identity.
    pub fn digest(&self) -> &str {
        self.digest.get_or_init(|| self.dataset.sha256_hex())
    }

    fn fraud_sims(&self) -> Vec<&String> {
        self.truth.fraud_sims()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeCampaign {
    pub n_probes: u64,
    pub seed: u64,
    /// Operator-owned local numbers the probes dial.
    pub target_numbers: Vec<String>,
    /// Relative cost of one probe call.
    pub unit_cost: f64,
}

impl Default for ProbeCampaign {
    fn default() -> Self {
        ProbeCampaign {
            n_probes: 100,
            seed: 42,
            target_numbers: Vec::new(),
            unit_cost: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RouteTaken {
    /// Terminated through the normal interconnect; caller shows international.
    Legitimate,
    /// Terminated through a fraud SIM; caller shows local, SIM is caught.
    Bypass,
    /// Anti-spam dropped the probe before any network event.
    Blocked,
    /// Anti-spam pushed the probe back onto the legitimate route.
    Rerouted,
}

impl RouteTaken {
    pub fn as_str(self) -> &'static str {
        match self {
            RouteTaken::Legitimate => "LEGITIMATE",
            RouteTaken::Bypass => "BYPASS",
            RouteTaken::Blocked => "BLOCKED",
            RouteTaken::Rerouted => "REROUTED",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub route_taken: RouteTaken,
    /// Caller id seen by the dialed number; None when the call never landed.
    pub presented_caller: Option<String>,
    /// Set exactly when the route was BYPASS.
    pub detected_sim: Option<String>,
    pub target: String,
    pub timestamp: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub detected: BTreeSet<String>,
    /// Detected share of the fraud SIM population (0 when none exist).
    pub detection_rate: f64,
    pub probes_spent: u64,
    pub cost_proxy: f64,
    pub route_counts: BTreeMap<String, u64>,
    pub world_digest: String,
}

/// Runs one probe campaign against a generated world.
///
/// Each probe is routed independently: with probability
/// `bypass_fraction` it is offered to the fraud fleet, where anti-spam
/// may block or reroute it; otherwise it terminates through a uniformly
/// chosen currently-active fraud SIM and the local presented caller
/// betrays that SIM. Deterministic under the campaign seed.
pub fn run_campaign(
    world: &World,
    campaign: &ProbeCampaign,
) -> Result<(CampaignReport, Vec<ProbeResult>), TcgError> {
    if campaign.n_probes == 0 {
        return Err(TcgError::InvalidCampaign("n_probes must be >= 1".into()));
    }
    if campaign.target_numbers.is_empty() {
        return Err(TcgError::InvalidCampaign(
            "target_numbers must not be empty".into(),
        ));
    }
    for t in &campaign.target_numbers {
        match world.truth.labels.get(t) {
            Some(Label::Normal) => {}
            Some(Label::Fraud) => {
                return Err(TcgError::InvalidCampaign(format!(
                    "target {t} is a fraud sim, probes dial operator-owned numbers"
                )))
            }
            None => {
                return Err(TcgError::InvalidCampaign(format!(
                    "target {t} is not a sim of this world"
                )))
            }
        }
    }
    let fraud_sims = world.fraud_sims();
    if fraud_sims.is_empty() && world.config.bypass_fraction > 0.0 {
        return Err(TcgError::NoFraudSims);
    }

    let antispam = world.config.antispam;
    let window_sec = (world.dataset.window_end - world.dataset.window_start).num_seconds().max(1);
    let mut results = Vec::with_capacity(campaign.n_probes as usize);
    let mut detected = BTreeSet::new();
    let mut route_counts: BTreeMap<String, u64> = BTreeMap::new();

    for probe_idx in 0..campaign.n_probes {
        let mut rng = stream(campaign.seed, TAG_PROBE, probe_idx);
        let timestamp = world.dataset.window_start
            + chrono::Duration::seconds(rng.gen_range(0..window_sec));
        let target = campaign.target_numbers
            [rng.gen_range(0..campaign.target_numbers.len())]
        .clone();
        let offered = world.config.bypass_fraction > 0.0
            && rng.gen_bool(world.config.bypass_fraction);

        let result = if offered {
            let anti = if antispam.enabled {
                let u: f64 = rng.gen();
                if u < antispam.block_prob {
                    Some(RouteTaken::Blocked)
                } else if u < antispam.block_prob + antispam.reroute_prob {
                    Some(RouteTaken::Rerouted)
                } else {
                    None
                }
            } else {
                None
            };
            match anti {
                Some(RouteTaken::Blocked) => ProbeResult {
                    route_taken: RouteTaken::Blocked,
                    presented_caller: None,
                    detected_sim: None,
                    target,
                    timestamp,
                },
                Some(RouteTaken::Rerouted) => ProbeResult {
                    route_taken: RouteTaken::Rerouted,
                    presented_caller: Some(format!("TCGPROBE{probe_idx:05}")),
                    detected_sim: None,
                    target,
                    timestamp,
                },
                _ => {
                    let active: Vec<&&String> = fraud_sims
                        .iter()
                        .filter(|s| world.truth.sim_active_at(s, timestamp))
                        .collect();
                    if active.is_empty() {
                        // no SIM on shift can terminate it; the call still
                        // completes over the legitimate route
                        ProbeResult {
                            route_taken: RouteTaken::Legitimate,
                            presented_caller: Some(format!("TCGPROBE{probe_idx:05}")),
                            detected_sim: None,
                            target,
                            timestamp,
                        }
                    } else {
                        let sim = (*active[rng.gen_range(0..active.len())]).clone();
                        detected.insert(sim.clone());
                        ProbeResult {
                            route_taken: RouteTaken::Bypass,
                            presented_caller: Some(sim.clone()),
                            detected_sim: Some(sim),
                            target,
                            timestamp,
                        }
                    }
                }
            }
        } else {
            ProbeResult {
                route_taken: RouteTaken::Legitimate,
                presented_caller: Some(format!("TCGPROBE{probe_idx:05}")),
                detected_sim: None,
                target,
                timestamp,
            }
        };
        *route_counts.entry(result.route_taken.as_str().to_string()).or_default() += 1;
        results.push(result);
    }

    debug_assert!(detected.iter().all(|s| world.truth.labels[s] == Label::Fraud));
    let detection_rate = if fraud_sims.is_empty() {
        0.0
    } else {
        detected.len() as f64 / fraud_sims.len() as f64
    };
    let report = CampaignReport {
        detected,
        detection_rate,
        probes_spent: campaign.n_probes,
        cost_proxy: campaign.n_probes as f64 * campaign.unit_cost,
        route_counts,
        world_digest: world.digest().to_string(),
    };
    Ok((report, results))
}

/// CDR records the probes themselves would leave in the operator's data:
/// BYPASS probes log an MO call at the caught SIM plus the MT leg at the
/// target, rerouted/legitimate probes only the international MT leg, and
/// BLOCKED probes nothing at all.
pub fn probe_records(world: &World, results: &[ProbeResult]) -> Vec<CdrRecord> {
    // per-sim usual tower and device, gathered in one pass
    let mut cell_counts: HashMap<&str, HashMap<&str, u64>> = HashMap::new();
    let mut devices: HashMap<&str, (&str, &str)> = HashMap::new();
    for r in world.dataset.records() {
        *cell_counts
            .entry(&r.sim_id)
            .or_default()
            .entry(&r.cell_id)
            .or_default() += 1;
        devices.entry(&r.sim_id).or_insert((&r.imei, &r.imsi));
    }
    let modal_cell = |sim: &str| -> String {
        cell_counts
            .get(sim)
            .and_then(|m| {
                m.iter()
                    .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
                    .map(|(c, _)| c.to_string())
            })
            .unwrap_or_else(|| "C0000".to_string())
    };
    let sub_device = |sim: &str| -> (String, String) {
        devices
            .get(sim)
            .map(|(imei, imsi)| (imei.to_string(), imsi.to_string()))
            .unwrap_or_else(|| (format!("D{sim}"), format!("I{sim}")))
    };

    let migration = MigrationSchedule::from_config(&world.config);
    let mut out = Vec::new();
    for (i, p) in results.iter().enumerate() {
        match p.route_taken {
            RouteTaken::Blocked => {}
            RouteTaken::Bypass => {
                let sim = p.detected_sim.as_ref().expect("bypass probes carry a sim");
                let home = world.truth.box_assignment[sim];
                let site =
                    migration.site_at(home, world.dataset.window_start, p.timestamp);
                let pool = &world.truth.box_imei_pools[site];
                let imei = pool[i % pool.len()].clone();
                let imsi = devices
                    .get(sim.as_str())
                    .map(|(_, imsi)| imsi.to_string())
                    .unwrap_or_else(|| format!("I{sim}"));
                out.push(CdrRecord {
                    record_id: format!("P{i:07}O"),
                    timestamp: p.timestamp,
                    sim_id: sim.clone(),
                    imei,
                    imsi,
                    peer_id: p.target.clone(),
                    cell_id: world.truth.box_sites[site].clone(),
                    direction: Direction::Mo,
                    service: Service::Voice,
                    duration_sec: PROBE_CALL_SEC,
                    peer_is_international: false,
                });
                let (imei, imsi) = sub_device(&p.target);
                out.push(CdrRecord {
                    record_id: format!("P{i:07}T"),
                    timestamp: p.timestamp,
                    sim_id: p.target.clone(),
                    imei,
                    imsi,
                    peer_id: sim.clone(),
                    cell_id: modal_cell(&p.target),
                    direction: Direction::Mt,
                    service: Service::Voice,
                    duration_sec: PROBE_CALL_SEC,
                    peer_is_international: false,
                });
            }
            RouteTaken::Legitimate | RouteTaken::Rerouted => {
                let (imei, imsi) = sub_device(&p.target);
                out.push(CdrRecord {
                    record_id: format!("P{i:07}T"),
                    timestamp: p.timestamp,
                    sim_id: p.target.clone(),
                    imei,
                    imsi,
                    peer_id: p
                        .presented_caller
                        .clone()
                        .unwrap_or_else(|| "TCGPROBE".to_string()),
                    cell_id: modal_cell(&p.target),
                    direction: Direction::Mt,
                    service: Service::Voice,
                    duration_sec: PROBE_CALL_SEC,
                    peer_is_international: true,
                });
            }
        }
    }
    out
}

/// One line of the TCG-vs-ML comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub method: String,
    /// Sims the method would hand to the fraud desk.
    pub flags: u64,
    pub recall: f64,
    pub false_positives: u64,
    pub cost_proxy: f64,
}

/// An ML evaluation entering the comparison, tagged with the digest of
/// the world it was produced on (None when unknown).
#[derive(Debug, Clone)]
pub struct NamedEval {
    pub name: String,
    pub report: EvalReport,
    pub world_digest: Option<String>,
}

/// Side-by-side recall / false positives / cost for the probe campaign
/// and each ML model. All inputs must come from the same world.
pub fn compare(
    campaign: &CampaignReport,
    models: &[NamedEval],
    truth: &GroundTruth,
) -> Result<Vec<ComparisonRow>, TcgError> {
    let n_fraud = truth.fraud_sims().len() as f64;
    for m in models {
        if let Some(d) = &m.world_digest {
            if *d != campaign.world_digest {
                return Err(TcgError::WorldMismatch {
                    campaign: campaign.world_digest.clone(),
                    model: d.clone(),
                });
            }
        }
    }

    let mut rows = vec![ComparisonRow {
        method: "tcg".to_string(),
        flags: campaign.detected.len() as u64,
        recall: if n_fraud == 0.0 {
            0.0
        } else {
            campaign.detected.len() as f64 / n_fraud
        },
        false_positives: 0,
        cost_proxy: campaign.cost_proxy,
    }];
    for m in models {
        rows.push(ComparisonRow {
            method: m.name.clone(),
            flags: m.report.true_positives + m.report.false_positives,
            recall: m.report.recall,
            false_positives: m.report.false_positives,
            cost_proxy: 0.0,
        });
    }
    Ok(rows)
}

/// Plain-text rendering of a comparison table.
pub fn comparison_text(rows: &[ComparisonRow]) -> String {
    let mut out = String::from("method       flags   recall   false_pos   cost\n");
    for r in rows {
        out.push_str(&format!(
            "{:<12} {:>5} {:>8.4} {:>11} {:>6.1}\n",
            r.method, r.flags, r.recall, r.false_positives, r.cost_proxy
        ));
    }
    out
}
