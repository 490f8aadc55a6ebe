use crate::cdr::Label;

use super::{FeatureError, FeatureMatrix};

/// Outcome of correlation-based feature selection.
#[derive(Debug, Clone)]
pub struct FeatureSelection {
    /// Non-constant columns ranked by |point-biserial correlation| with
    /// the label, strongest first. Ties keep column order.
    pub ranking: Vec<(usize, f64)>,
    /// The chosen top-k column indices, in original column order.
    pub selected: Vec<usize>,
}

/// Drops zero-variance columns, ranks the rest by absolute point-biserial
/// correlation with the binary label and keeps the top k.
pub fn select_features(
    m: &FeatureMatrix,
    labels: &[Label],
    k: usize,
) -> Result<FeatureSelection, FeatureError> {
    assert_eq!(m.n_rows(), labels.len(), "rows and labels must align");
    if k < 1 || k > m.n_cols() {
        return Err(FeatureError::KOutOfRange { k, max: m.n_cols() });
    }
    let n = m.n_rows() as f64;
    let y: Vec<f64> = labels
        .iter()
        .map(|l| if *l == Label::Fraud { 1.0 } else { 0.0 })
        .collect();
    let y_mean = y.iter().sum::<f64>() / n;
    let y_var: f64 = y.iter().map(|v| (v - y_mean) * (v - y_mean)).sum();

    let mut scored = Vec::new();
    for j in 0..m.n_cols() {
        let col = m.column(j);
        let x_mean = col.iter().sum::<f64>() / n;
        let x_var: f64 = col.iter().map(|v| (v - x_mean) * (v - x_mean)).sum();
        if x_var == 0.0 {
            continue; // zero-variance column, never selected
        }
        let cov: f64 = col
            .iter()
            .zip(&y)
            .map(|(x, yv)| (x - x_mean) * (yv - y_mean))
            .sum();
        let r = if y_var == 0.0 {
            0.0 // single-class labels: nothing correlates
        } else {
            cov / (x_var.sqrt() * y_var.sqrt())
        };
        scored.push((j, r));
    }
    if scored.is_empty() {
        return Err(FeatureError::AllColumnsConstant);
    }

    let mut ranking = scored;
    ranking.sort_by(|a, b| {
        b.1.abs()
            .partial_cmp(&a.1.abs())
            .expect("correlations are finite")
            .then(a.0.cmp(&b.0))
    });
    let mut selected: Vec<usize> = ranking.iter().take(k.min(ranking.len())).map(|r| r.0).collect();
    selected.sort_unstable();
    Ok(FeatureSelection { ranking, selected })
}
