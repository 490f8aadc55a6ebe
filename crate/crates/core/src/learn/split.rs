use rand::Rng;

use crate::cdr::Label;
use crate::rngs;

use super::LearnError;

const TAG_SPLIT: u64 = 0x53504c4954;

/// Row indices of a stratified train/test partition, each sorted
/// ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainTestSplit {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified split. The train side gets floor(train_fraction * n) rows
/// overall: each stratum contributes floor(train_fraction * n_s), and any
/// remainder rows go to the train side of the strata with the largest
/// fractional parts (label order breaks ties).
pub fn split(
    labels: &[Label],
    train_fraction: f64,
    seed: u64,
) -> Result<TrainTestSplit, LearnError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(LearnError::InvalidParam(format!(
            "train_fraction {train_fraction} outside (0, 1)"
        )));
    }
    let n = labels.len();
    let strata = [Label::Normal, Label::Fraud];
    let mut per_stratum: Vec<(Label, Vec<usize>)> = strata
        .iter()
        .map(|&lab| {
            (
                lab,
                labels
                    .iter()
                    .enumerate()
                    .filter(|(_, l)| **l == lab)
                    .map(|(i, _)| i)
                    .collect::<Vec<_>>(),
            )
        })
        .filter(|(_, v)| !v.is_empty())
        .collect();
    for (lab, rows) in &per_stratum {
        if rows.len() < 2 {
            return Err(LearnError::StratumTooSmall {
                label: lab.to_string(),
                n: rows.len(),
            });
        }
    }

    let target_train = (train_fraction * n as f64).floor() as usize;
    let mut takes: Vec<usize> = Vec::with_capacity(per_stratum.len());
    let mut fracs: Vec<(usize, f64)> = Vec::with_capacity(per_stratum.len());
    for (s, (_, rows)) in per_stratum.iter().enumerate() {
        let exact = train_fraction * rows.len() as f64;
        let base = exact.floor() as usize;
        takes.push(base);
        fracs.push((s, exact - base as f64));
    }
    let mut remainder = target_train.saturating_sub(takes.iter().sum::<usize>());
    fracs.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite").then(a.0.cmp(&b.0)));
    for (s, _) in fracs {
        if remainder == 0 {
            break;
        }
        if takes[s] < per_stratum[s].1.len() {
            takes[s] += 1;
            remainder -= 1;
        }
    }

    let mut rng = rngs::stream(seed, TAG_SPLIT, 0);
    let mut train = Vec::with_capacity(target_train);
    let mut test = Vec::with_capacity(n - target_train);
    for (s, (_, rows)) in per_stratum.iter_mut().enumerate() {
        for i in (1..rows.len()).rev() {
            let j = rng.gen_range(0..=i);
            rows.swap(i, j);
        }
        train.extend_from_slice(&rows[..takes[s]]);
        test.extend_from_slice(&rows[takes[s]..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(TrainTestSplit { train, test })
}
