use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cdr::Label;
use crate::features::FeatureMatrix;
use crate::rngs;

use super::tree::{grow, TreeModel, TreeParams};
use super::LearnError;

const TAG_FOREST: u64 = 0x464f_5245;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features considered per split; 0 means ceil(sqrt(n_features)).
    pub m_try: usize,
    /// When false every tree sees the full training set (useful for the
    /// forest == tree reduction check).
    pub bootstrap: bool,
    pub tree: TreeParams,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            m_try: 0,
            bootstrap: true,
            tree: TreeParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<TreeModel>,
    pub tree_seeds: Vec<u64>,
    pub m_try: usize,
    pub bootstrap: bool,
}

impl ForestModel {
    /// Majority vote over trees; a tie resolves to NORMAL.
    pub fn predict_row(&self, row: &[f64]) -> Label {
        let fraud_votes = self
            .trees
            .iter()
            .filter(|t| t.predict_row(row) == Label::Fraud)
            .count();
        if 2 * fraud_votes > self.trees.len() {
            Label::Fraud
        } else {
            Label::Normal
        }
    }

    pub fn predict(&self, m: &FeatureMatrix) -> Vec<Label> {
        m.rows.iter().map(|r| self.predict_row(r)).collect()
    }
}

/// Fits a random forest: each tree on a bootstrap resample, considering
/// `m_try` randomly chosen features at every split. Per-tree randomness is
/// derived from (seed, tree index), never from scheduling order.
pub fn train_forest(
    m: &FeatureMatrix,
    y: &[Label],
    params: ForestParams,
    seed: u64,
) -> Result<ForestModel, LearnError> {
    if m.n_rows() == 0 {
        return Err(LearnError::EmptyTrainingSet);
    }
    if m.n_rows() != y.len() {
        return Err(LearnError::LengthMismatch {
            left: m.n_rows(),
            right: y.len(),
        });
    }
    if params.n_trees == 0 {
        return Err(LearnError::InvalidParam("n_trees must be >= 1".into()));
    }
    let d = m.n_cols();
    let m_try = if params.m_try == 0 {
        (d as f64).sqrt().ceil() as usize
    } else {
        params.m_try
    };
    if m_try > d {
        return Err(LearnError::InvalidParam(format!(
            "m_try {m_try} exceeds {d} features"
        )));
    }

    let n = m.n_rows();
    let mut trees = Vec::with_capacity(params.n_trees);
    let mut tree_seeds = Vec::with_capacity(params.n_trees);
    for tree_idx in 0..params.n_trees {
        let tree_seed = seed.wrapping_add(tree_idx as u64);
        tree_seeds.push(tree_seed);
        let mut rng = rngs::stream(seed, TAG_FOREST, tree_idx as u64);

        let rows: Vec<usize> = if params.bootstrap {
            (0..n).map(|_| rng.gen_range(0..n)).collect()
        } else {
            (0..n).collect()
        };

        let mut pick = || {
            if m_try >= d {
                // all features in natural order: identical to a plain tree
                (0..d).collect()
            } else {
                let mut idx: Vec<usize> = (0..d).collect();
                for i in 0..m_try {
                    let j = rng.gen_range(i..d);
                    idx.swap(i, j);
                }
                let mut subset = idx[..m_try].to_vec();
                subset.sort_unstable();
                subset
            }
        };
        let root = grow(m, y, &rows, 0, &params.tree, &mut pick);
        trees.push(TreeModel {
            root,
            params: params.tree,
        });
    }

    Ok(ForestModel {
        trees,
        tree_seeds,
        m_try,
        bootstrap: params.bootstrap,
    })
}
