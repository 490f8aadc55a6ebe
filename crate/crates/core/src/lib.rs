//! Bypass-fraud (SIMbox) detection lab.
//!
//! The crate covers the full desk-scale pipeline on synthetic data:
//!
//! * [`cdr`] — call detail record schema, CSV parsing/serialization and
//!   stage-1 cleaning (missing values, duplicates, extra columns).
//! * [`synth`] — labeled synthetic CDR worlds: legitimate subscribers,
//!   SIMbox fleets terminating bypassed international calls, and the
//!   human-behavior-simulation evasion suite (migration, rotation,
//!   service mimicry, family lists).
//! * [`features`] — per-SIM usage-profile feature vectors, scaling,
//!   correlation-based feature selection and PCA.
//! * [`learn`] — decision tree, random forest, linear SVM, small MLP,
//!   k-means baseline, stratified splitting and evaluation reports.
//! * [`tcg`] — simulated test-call-generation campaigns against a
//!   synthetic world, including fraudster anti-spam countermeasures.
//!
//! Everything downstream of a seed is deterministic: the same scenario
//! config produces byte-identical datasets, and the same training seed
//! produces identical models.

pub mod cdr;
pub mod features;
pub mod learn;
pub mod synth;
pub mod tcg;

mod rngs;

pub use cdr::{CdrRecord, CleanStats, Dataset, Direction, Label, LabelTable, Service};
pub use synth::{GroundTruth, ScenarioConfig};
