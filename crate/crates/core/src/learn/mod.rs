//! Stage-3/4 models: tree, forest, linear SVM, MLP, k-means, and the
//! split/evaluate machinery around them.
//!
//! All trainers are deterministic functions of (data, hyperparameters,
//! seed). FRAUD is the positive class; every classifier resolves ties to
//! NORMAL, because flagging a legitimate subscriber is the costly error.

mod eval;
mod forest;
mod kmeans;
mod mlp;
mod model;
mod split;
mod svm;
mod tree;

pub use eval::{evaluate, EvalReport};
pub use forest::{train_forest, ForestModel, ForestParams};
pub use kmeans::{kmeans, KMeansResult};
pub use mlp::{train_mlp, MlpGradients, MlpModel, MlpParams, MLP_HIDDEN, MLP_LEARNING_RATE, MLP_MOMENTUM};
pub use model::{KMeansModel, ModelKind, ModelParams, TrainedModel, MODEL_SCHEMA_VERSION};
pub use split::{split, TrainTestSplit};
pub use svm::{train_svm, SvmModel, SvmParams};
pub use tree::{train_tree, TreeModel, TreeNode, TreeParams};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("stratum {label} has {n} rows, need at least 2")]
    StratumTooSmall { label: String, n: usize },
    #[error("length mismatch: {left} predictions vs {right} labels")]
    LengthMismatch { left: usize, right: usize },
    #[error("mlp training diverged (non-finite loss) at epoch {epoch}")]
    MlpDiverged { epoch: usize },
    #[error("model bound to columns [{expected}] but matrix has [{got}]")]
    ColumnMismatch { expected: String, got: String },
    #[error("model serialization: {0}")]
    Serde(#[from] serde_json::Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

pub(crate) fn binary(label: crate::cdr::Label) -> usize {
    match label {
        crate::cdr::Label::Normal => 0,
        crate::cdr::Label::Fraud => 1,
    }
}
