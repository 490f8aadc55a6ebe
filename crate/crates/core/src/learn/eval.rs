use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cdr::Label;

use super::LearnError;

/// Confusion counts and the derived metrics, with FRAUD as the positive
/// class. Ratios with a zero denominator are defined as 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub true_positives: u64,
    pub false_positives: u64,
    pub true_negatives: u64,
    pub false_negatives: u64,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub fpr: f64,
    /// sim_ids predicted FRAUD, when ids were supplied.
    #[serde(default)]
    pub flagged: Vec<String>,
    /// Hyperparameters of the model under evaluation, for provenance.
    #[serde(default)]
    pub hyperparams: BTreeMap<String, String>,
}

fn safe_div(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Scores predictions against ground truth.
pub fn evaluate(predictions: &[Label], truth: &[Label]) -> Result<EvalReport, LearnError> {
    if predictions.len() != truth.len() {
        return Err(LearnError::LengthMismatch {
            left: predictions.len(),
            right: truth.len(),
        });
    }
    let mut tp = 0;
    let mut fp = 0;
    let mut tn = 0;
    let mut fn_ = 0;
    for (p, t) in predictions.iter().zip(truth) {
        match (p, t) {
            (Label::Fraud, Label::Fraud) => tp += 1,
            (Label::Fraud, Label::Normal) => fp += 1,
            (Label::Normal, Label::Normal) => tn += 1,
            (Label::Normal, Label::Fraud) => fn_ += 1,
        }
    }
    let precision = safe_div(tp, tp + fp);
    let recall = safe_div(tp, tp + fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(EvalReport {
        true_positives: tp,
        false_positives: fp,
        true_negatives: tn,
        false_negatives: fn_,
        accuracy: safe_div(tp + tn, tp + fp + tn + fn_),
        precision,
        recall,
        f1,
        fpr: safe_div(fp, fp + tn),
        flagged: Vec::new(),
        hyperparams: BTreeMap::new(),
    })
}

impl EvalReport {
    /// Records which sims were flagged; `sim_ids[i]` pairs with
    /// `predictions[i]` as passed to [`evaluate`].
    pub fn with_flags(mut self, predictions: &[Label], sim_ids: &[String]) -> Self {
        self.flagged = predictions
            .iter()
            .zip(sim_ids)
            .filter(|(p, _)| **p == Label::Fraud)
            .map(|(_, s)| s.clone())
            .collect();
        self
    }

    pub fn with_hyperparams(mut self, params: BTreeMap<String, String>) -> Self {
        self.hyperparams = params;
        self
    }

    pub fn n_rows(&self) -> u64 {
        self.true_positives + self.false_positives + self.true_negatives + self.false_negatives
    }

    /// Human-readable summary table.
    pub fn text_table(&self) -> String {
        let mut out = String::new();
        out.push_str("                 predicted FRAUD   predicted NORMAL\n");
        out.push_str(&format!(
            "actual FRAUD   {:>16} {:>18}\n",
            self.true_positives, self.false_negatives
        ));
        out.push_str(&format!(
            "actual NORMAL  {:>16} {:>18}\n",
            self.false_positives, self.true_negatives
        ));
        out.push_str(&format!(
            "accuracy {:.4}  precision {:.4}  recall {:.4}  f1 {:.4}  fpr {:.4}\n",
            self.accuracy, self.precision, self.recall, self.f1, self.fpr
        ));
        if !self.hyperparams.is_empty() {
            let params: Vec<String> = self
                .hyperparams
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect();
            out.push_str(&format!("model: {}\n", params.join(" ")));
        }
        out
    }
}
