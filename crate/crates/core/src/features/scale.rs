use serde::{Deserialize, Serialize};

use super::{FeatureError, FeatureMatrix};

/// Per-column standardization parameters learned on a training split.
/// Standard deviations use the sample (n-1) denominator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub columns: Vec<String>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Columns with zero variance; they map to 0 instead of dividing.
    pub constant: Vec<bool>,
}

pub fn fit_scaler(m: &FeatureMatrix) -> Result<ScalerParams, FeatureError> {
    let n = m.n_rows();
    if n < 2 {
        return Err(FeatureError::TooFewRows { need: 2, got: n });
    }
    let d = m.n_cols();
    let mut mean = vec![0.0; d];
    for row in &m.rows {
        for (j, v) in row.iter().enumerate() {
            mean[j] += v;
        }
    }
    for mj in &mut mean {
        *mj /= n as f64;
    }
    let mut var = vec![0.0; d];
    for row in &m.rows {
        for (j, v) in row.iter().enumerate() {
            let dlt = v - mean[j];
            var[j] += dlt * dlt;
        }
    }
    let mut std = vec![0.0; d];
    let mut constant = vec![false; d];
    for j in 0..d {
        var[j] /= (n - 1) as f64;
        std[j] = var[j].sqrt();
        constant[j] = std[j] == 0.0;
    }
    Ok(ScalerParams {
        columns: m.columns.clone(),
        mean,
        std,
        constant,
    })
}

pub fn apply_scaler(m: &FeatureMatrix, p: &ScalerParams) -> Result<FeatureMatrix, FeatureError> {
    if m.columns != p.columns {
        return Err(FeatureError::ColumnMismatch(format!(
            "scaler fit on [{}], matrix has [{}]",
            p.columns.join(","),
            m.columns.join(",")
        )));
    }
    let rows = m
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(j, v)| {
                    if p.constant[j] {
                        0.0
                    } else {
                        (v - p.mean[j]) / p.std[j]
                    }
                })
                .collect()
        })
        .collect();
    Ok(FeatureMatrix {
        sim_ids: m.sim_ids.clone(),
        columns: m.columns.clone(),
        rows,
    })
}
