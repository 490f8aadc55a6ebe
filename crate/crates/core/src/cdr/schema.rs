use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

/// Which end of the event this record was logged at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// Mobile-originated: the SIM placed the call / sent the SMS.
    #[serde(rename = "MO")]
    Mo,
    /// Mobile-terminated: the SIM received it.
    #[serde(rename = "MT")]
    Mt,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Mo => "MO",
            Direction::Mt => "MT",
        }
    }
}

impl FromStr for Direction {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "MO" => Ok(Direction::Mo),
            "MT" => Ok(Direction::Mt),
            _ => Err(()),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Service {
    #[serde(rename = "VOICE")]
    Voice,
    #[serde(rename = "SMS")]
    Sms,
    #[serde(rename = "DATA")]
    Data,
}

impl Service {
    pub fn as_str(self) -> &'static str {
        match self {
            Service::Voice => "VOICE",
            Service::Sms => "SMS",
            Service::Data => "DATA",
        }
    }
}

impl FromStr for Service {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "VOICE" => Ok(Service::Voice),
            "SMS" => Ok(Service::Sms),
            "DATA" => Ok(Service::Data),
            _ => Err(()),
        }
    }
}

impl fmt::Display for Service {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One network event leg (call, SMS or data session).
///
/// Identifiers are opaque strings: a real operator export would carry
/// hashed values, the synthesizer uses readable synthetic ids. For SMS
/// records `duration_sec` is always 0; for DATA it is a bytes-proxy in
/// seconds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CdrRecord {
    pub record_id: String,
    pub timestamp: DateTime<Utc>,
    pub sim_id: String,
    pub imei: String,
    pub imsi: String,
    pub peer_id: String,
    pub cell_id: String,
    pub direction: Direction,
    pub service: Service,
    pub duration_sec: u32,
    pub peer_is_international: bool,
}

impl CdrRecord {
    /// Sort key shared by every consumer: timestamp first, record id as
    /// the tie-break.
    pub fn sort_key(&self) -> (DateTime<Utc>, &str) {
        (self.timestamp, &self.record_id)
    }
}

/// An observation window full of records, sorted by (timestamp, record_id).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    records: Vec<CdrRecord>,
    pub window_start: DateTime<Utc>,
    pub window_end: DateTime<Utc>,
}

impl Dataset {
    /// Builds a dataset, sorting the records into canonical order.
    pub fn new(
        mut records: Vec<CdrRecord>,
        window_start: DateTime<Utc>,
        window_end: DateTime<Utc>,
    ) -> Self {
        records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        Dataset {
            records,
            window_start,
            window_end,
        }
    }

    pub fn records(&self) -> &[CdrRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Ground-truth class of a SIM. FRAUD is the positive class throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "NORMAL")]
    Normal,
    #[serde(rename = "FRAUD")]
    Fraud,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Normal => "NORMAL",
            Label::Fraud => "FRAUD",
        }
    }
}

impl FromStr for Label {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "NORMAL" => Ok(Label::Normal),
            "FRAUD" => Ok(Label::Fraud),
            _ => Err(()),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// sim_id -> label. BTreeMap so serialization order is stable.
pub type LabelTable = BTreeMap<String, Label>;
