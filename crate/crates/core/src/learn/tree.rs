use serde::{Deserialize, Serialize};

use crate::cdr::Label;
use crate::features::FeatureMatrix;

use super::{binary, LearnError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// None means unlimited depth.
    pub max_depth: Option<u32>,
    /// Minimum rows on each side of a split.
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: Some(12),
            min_leaf: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        label: Label,
        /// Training rows routed here, [normal, fraud].
        counts: [u64; 2],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub root: TreeNode,
    pub params: TreeParams,
}

impl TreeModel {
    pub fn predict_row(&self, row: &[f64]) -> Label {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { label, .. } => return *label,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if row[*feature] < *threshold { left } else { right };
                }
            }
        }
    }

    pub fn predict(&self, m: &FeatureMatrix) -> Vec<Label> {
        m.rows.iter().map(|r| self.predict_row(r)).collect()
    }
}

/// Gini impurity of a [normal, fraud] count pair.
pub fn gini(counts: [u64; 2]) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let p0 = counts[0] as f64 / n;
    let p1 = counts[1] as f64 / n;
    1.0 - p0 * p0 - p1 * p1
}

/// The split chosen at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct BestSplit {
    pub feature: usize,
    pub threshold: f64,
    pub weighted_gini: f64,
}

/// Greedy CART split search over the given candidate features.
///
/// Candidate thresholds are midpoints of consecutive distinct sorted
/// values; the winner minimizes the weighted Gini impurity of the two
/// children, with ties broken by (lower feature index, lower threshold).
/// Only splits leaving at least `min_leaf` rows per side qualify.
pub(crate) fn best_split(
    m: &FeatureMatrix,
    y: &[Label],
    rows: &[usize],
    features: &[usize],
    min_leaf: usize,
) -> Option<BestSplit> {
    let n = rows.len();
    let mut total = [0u64; 2];
    for &r in rows {
        total[binary(y[r])] += 1;
    }

    let mut best: Option<BestSplit> = None;
    for &f in features {
        let mut order: Vec<(f64, usize)> = rows.iter().map(|&r| (m.rows[r][f], binary(y[r]))).collect();
        order.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite features"));

        let mut left = [0u64; 2];
        for i in 0..n - 1 {
            left[order[i].1] += 1;
            if order[i].0 == order[i + 1].0 {
                continue; // not a boundary between distinct values
            }
            let left_n = i + 1;
            let right_n = n - left_n;
            if left_n < min_leaf || right_n < min_leaf {
                continue;
            }
            let right = [total[0] - left[0], total[1] - left[1]];
            let weighted = (left_n as f64 * gini(left) + right_n as f64 * gini(right)) / n as f64;
            let threshold = order[i].0 + (order[i + 1].0 - order[i].0) / 2.0;
            let better = match &best {
                None => true,
                Some(b) => weighted < b.weighted_gini,
            };
            if better {
                best = Some(BestSplit {
                    feature: f,
                    threshold,
                    weighted_gini: weighted,
                });
            }
        }
    }
    best
}

fn leaf(counts: [u64; 2]) -> TreeNode {
    // majority label; tie resolves to NORMAL
    let label = if counts[1] > counts[0] {
        Label::Fraud
    } else {
        Label::Normal
    };
    TreeNode::Leaf { label, counts }
}

pub(crate) fn grow<F>(
    m: &FeatureMatrix,
    y: &[Label],
    rows: &[usize],
    depth: u32,
    params: &TreeParams,
    feature_pick: &mut F,
) -> TreeNode
where
    F: FnMut() -> Vec<usize>,
{
    let mut counts = [0u64; 2];
    for &r in rows {
        counts[binary(y[r])] += 1;
    }
    let pure = counts[0] == 0 || counts[1] == 0;
    let depth_exhausted = params.max_depth.is_some_and(|d| depth >= d);
    if pure || depth_exhausted || rows.len() < 2 * params.min_leaf {
        return leaf(counts);
    }

    let features = feature_pick();
    let Some(split) = best_split(m, y, rows, &features, params.min_leaf) else {
        return leaf(counts);
    };

    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
        .iter()
        .partition(|&&r| m.rows[r][split.feature] < split.threshold);
    TreeNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(grow(m, y, &left_rows, depth + 1, params, feature_pick)),
        right: Box::new(grow(m, y, &right_rows, depth + 1, params, feature_pick)),
    }
}

/// Fits a single CART decision tree on all features.
pub fn train_tree(
    m: &FeatureMatrix,
    y: &[Label],
    params: TreeParams,
) -> Result<TreeModel, LearnError> {
    if m.n_rows() == 0 {
        return Err(LearnError::EmptyTrainingSet);
    }
    if m.n_rows() != y.len() {
        return Err(LearnError::LengthMismatch {
            left: m.n_rows(),
            right: y.len(),
        });
    }
    if params.min_leaf == 0 {
        return Err(LearnError::InvalidParam("min_leaf must be >= 1".into()));
    }
    let rows: Vec<usize> = (0..m.n_rows()).collect();
    let all_features: Vec<usize> = (0..m.n_cols()).collect();
    let mut pick = || all_features.clone();
    let root = grow(m, y, &rows, 0, &params, &mut pick);
    Ok(TreeModel { root, params })
}
