use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cdr::Label;
use crate::features::{apply_scaler, FeatureMatrix, ScalerParams};

use super::{ForestModel, LearnError, MlpModel, SvmModel, TreeModel};

pub const MODEL_SCHEMA_VERSION: u32 = 1;

/// Centroids plus the cluster -> flag mapping learned from training
/// labels (clusters whose members were majority FRAUD flag as FRAUD).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansModel {
    pub centroids: Vec<Vec<f64>>,
    pub fraud_clusters: Vec<bool>,
}

impl KMeansModel {
    pub fn assign_row(&self, row: &[f64]) -> usize {
        let mut best = (0, f64::INFINITY);
        for (i, c) in self.centroids.iter().enumerate() {
            let d: f64 = c.iter().zip(row).map(|(x, y)| (x - y) * (x - y)).sum();
            if d < best.1 {
                best = (i, d);
            }
        }
        best.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "model", rename_all = "lowercase")]
pub enum ModelParams {
    Tree(TreeModel),
    Forest(ForestModel),
    Svm(SvmModel),
    Mlp(MlpModel),
    Kmeans(KMeansModel),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Tree,
    Forest,
    Svm,
    Mlp,
    Kmeans,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Tree => "tree",
            ModelKind::Forest => "forest",
            ModelKind::Svm => "svm",
            ModelKind::Mlp => "mlp",
            ModelKind::Kmeans => "kmeans",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "tree" => Ok(ModelKind::Tree),
            "forest" => Ok(ModelKind::Forest),
            "svm" => Ok(ModelKind::Svm),
            "mlp" => Ok(ModelKind::Mlp),
            "kmeans" => Ok(ModelKind::Kmeans),
            _ => Err(()),
        }
    }
}

/// A trained model bound to the feature columns it was fit on.
/// Prediction refuses matrices whose column names differ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub schema_version: u32,
    pub columns: Vec<String>,
    /// Standardization applied before svm / mlp / kmeans prediction;
    /// trees operate on raw features.
    pub scaler: Option<ScalerParams>,
    #[serde(flatten)]
    pub params: ModelParams,
}

impl TrainedModel {
    pub fn new(columns: Vec<String>, scaler: Option<ScalerParams>, params: ModelParams) -> Self {
        TrainedModel {
            schema_version: MODEL_SCHEMA_VERSION,
            columns,
            scaler,
            params,
        }
    }

    pub fn kind(&self) -> ModelKind {
        match &self.params {
            ModelParams::Tree(_) => ModelKind::Tree,
            ModelParams::Forest(_) => ModelKind::Forest,
            ModelParams::Svm(_) => ModelKind::Svm,
            ModelParams::Mlp(_) => ModelKind::Mlp,
            ModelParams::Kmeans(_) => ModelKind::Kmeans,
        }
    }

    pub fn predict(&self, m: &FeatureMatrix) -> Result<Vec<Label>, LearnError> {
        if m.columns != self.columns {
            return Err(LearnError::ColumnMismatch {
                expected: self.columns.join(","),
                got: m.columns.join(","),
            });
        }
        let scaled;
        let input = match &self.scaler {
            Some(p) => {
                scaled = apply_scaler(m, p).map_err(|e| LearnError::ColumnMismatch {
                    expected: self.columns.join(","),
                    got: e.to_string(),
                })?;
                &scaled
            }
            None => m,
        };
        Ok(match &self.params {
            ModelParams::Tree(t) => t.predict(input),
            ModelParams::Forest(f) => f.predict(input),
            ModelParams::Svm(s) => s.predict(input),
            ModelParams::Mlp(nn) => nn.predict(input),
            ModelParams::Kmeans(km) => input
                .rows
                .iter()
                .map(|r| {
                    if km.fraud_clusters[km.assign_row(r)] {
                        Label::Fraud
                    } else {
                        Label::Normal
                    }
                })
                .collect(),
        })
    }

    pub fn to_json(&self) -> Result<String, LearnError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(json: &str) -> Result<Self, LearnError> {
        let model: TrainedModel = serde_json::from_str(json)?;
        if model.schema_version != MODEL_SCHEMA_VERSION {
            return Err(LearnError::InvalidParam(format!(
                "unsupported model schema_version {}",
                model.schema_version
            )));
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<(), LearnError> {
        std::fs::write(path, self.to_json()?).map_err(|source| LearnError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, LearnError> {
        let json = std::fs::read_to_string(path).map_err(|source| LearnError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&json)
    }
}
