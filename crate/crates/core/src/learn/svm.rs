use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cdr::Label;
use crate::features::FeatureMatrix;
use crate::rngs;

use super::LearnError;

const TAG_SVM: u64 = 0x53564d;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub lambda: f64,
    pub epochs: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            lambda: 1e-3,
            epochs: 50,
        }
    }
}

/// Linear SVM trained by primal stochastic subgradient descent on
/// lambda/2 ||w||^2 + mean hinge loss, step size 1/(lambda t). The bias
/// is unregularized. Expects standardized features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub lambda: f64,
    pub epochs: usize,
    /// Set when a training column mean exceeded 0.1 in magnitude,
    /// i.e. the input did not look standardized.
    pub standardization_warning: bool,
}

impl SvmModel {
    pub fn decision(&self, row: &[f64]) -> f64 {
        self.weights.iter().zip(row).map(|(w, x)| w * x).sum::<f64>() + self.bias
    }

    /// decision > 0 is FRAUD; the tie at exactly 0 resolves to NORMAL.
    pub fn predict_row(&self, row: &[f64]) -> Label {
        if self.decision(row) > 0.0 {
            Label::Fraud
        } else {
            Label::Normal
        }
    }

    pub fn predict(&self, m: &FeatureMatrix) -> Vec<Label> {
        m.rows.iter().map(|r| self.predict_row(r)).collect()
    }

    /// Regularized mean-hinge objective; invariant under row duplication.
    pub fn objective(&self, m: &FeatureMatrix, y: &[Label]) -> f64 {
        let norm_sq: f64 = self.weights.iter().map(|w| w * w).sum();
        let hinge: f64 = m
            .rows
            .iter()
            .zip(y)
            .map(|(row, label)| {
                let target = signed(*label);
                (1.0 - target * self.decision(row)).max(0.0)
            })
            .sum::<f64>()
            / m.n_rows() as f64;
        self.lambda / 2.0 * norm_sq + hinge
    }
}

fn signed(label: Label) -> f64 {
    match label {
        Label::Fraud => 1.0,
        Label::Normal => -1.0,
    }
}

pub fn train_svm(
    m: &FeatureMatrix,
    y: &[Label],
    params: SvmParams,
    seed: u64,
) -> Result<SvmModel, LearnError> {
    let n = m.n_rows();
    if n == 0 {
        return Err(LearnError::EmptyTrainingSet);
    }
    if n != y.len() {
        return Err(LearnError::LengthMismatch {
            left: n,
            right: y.len(),
        });
    }
    if params.lambda <= 0.0 {
        return Err(LearnError::InvalidParam("lambda must be > 0".into()));
    }

    let d = m.n_cols();
    let standardization_warning = (0..d).any(|j| {
        let mean = m.rows.iter().map(|r| r[j]).sum::<f64>() / n as f64;
        mean.abs() > 0.1
    });

    let mut rng = rngs::stream(seed, TAG_SVM, 0);
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut order: Vec<usize> = (0..n).collect();
    let mut t: u64 = 0;
    for _ in 0..params.epochs {
        // seeded Fisher-Yates shuffle each epoch
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        for &i in &order {
            t += 1;
            let eta = 1.0 / (params.lambda * t as f64);
            let target = signed(y[i]);
            let margin = target * (w.iter().zip(&m.rows[i]).map(|(wj, xj)| wj * xj).sum::<f64>() + b);
            let shrink = 1.0 - eta * params.lambda;
            for wj in w.iter_mut() {
                *wj *= shrink;
            }
            if margin < 1.0 {
                for (wj, xj) in w.iter_mut().zip(&m.rows[i]) {
                    *wj += eta * target * xj;
                }
                b += eta * target;
            }
        }
    }

    Ok(SvmModel {
        weights: w,
        bias: b,
        lambda: params.lambda,
        epochs: params.epochs,
        standardization_warning,
    })
}
