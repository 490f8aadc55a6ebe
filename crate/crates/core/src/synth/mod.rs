//! Labeled synthetic CDR worlds.
//!
//! [`generate`] builds a deterministic world from a [`ScenarioConfig`]:
//! legitimate subscribers with diurnal, mixed-service traffic, and SIMbox
//! fleets terminating a configurable share of inbound international
//! calls. The four evasion behaviors (SIM migration, SIM rotation,
//! service mimicry, family lists) can be switched on independently to
//! make the fraud fleet blend into the subscriber population.
//!
//! Every entity draws from its own seeded RNG stream, so toggling one
//! behavior never perturbs records it does not own; in particular
//! subscriber traffic is byte-identical across migration settings.

mod config;
mod generate;
mod world;

pub use config::{parse_scenario_file, parse_scenario_str, AntiSpamConfig, HbsConfig, ScenarioConfig};
pub use generate::{assign_families, generate};
pub use world::{GroundTruth, MigrationSchedule, ShiftTable, ShiftWindow};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid scenario config:\n{}", .0.join("\n"))]
    Config(Vec<String>),
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl SynthError {
    pub fn violations(&self) -> &[String] {
        match self {
            SynthError::Config(v) => v,
            _ => &[],
        }
    }
}
