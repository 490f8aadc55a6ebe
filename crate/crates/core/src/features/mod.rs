//! Per-SIM usage-profile features and stage-2 engineering.
//!
//! [`extract`] aggregates a cleaned [`Dataset`](crate::cdr::Dataset) into
//! one fixed-order row per SIM. Scaling, point-biserial feature selection
//! and PCA operate on the resulting [`FeatureMatrix`].

mod extract;
mod matrix;
mod pca;
mod scale;
mod select;

pub use extract::{extract, FEATURE_NAMES, N_FEATURES};
pub use matrix::FeatureMatrix;
pub use pca::{pca, Pca};
pub use scale::{apply_scaler, fit_scaler, ScalerParams};
pub use select::{select_features, FeatureSelection};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("need at least {need} rows, got {got}")]
    TooFewRows { need: usize, got: usize },
    #[error("column mismatch: {0}")]
    ColumnMismatch(String),
    #[error("k = {k} out of range 1..={max}")]
    KOutOfRange { k: usize, max: usize },
    #[error("every column is constant; nothing to select")]
    AllColumnsConstant,
    #[error("label table is missing sim {0}")]
    MissingLabel(String),
    #[error("feature csv: {0}")]
    Csv(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Looks up the label of every matrix row, in row order.
pub fn align_labels(
    m: &FeatureMatrix,
    labels: &crate::cdr::LabelTable,
) -> Result<Vec<crate::cdr::Label>, FeatureError> {
    m.sim_ids
        .iter()
        .map(|sim| {
            labels
                .get(sim)
                .copied()
                .ok_or_else(|| FeatureError::MissingLabel(sim.clone()))
        })
        .collect()
}
