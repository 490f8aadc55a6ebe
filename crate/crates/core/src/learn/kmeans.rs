use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::features::FeatureMatrix;
use crate::rngs;

use super::LearnError;

const TAG_KMEANS: u64 = 0x4b4d45414e53;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansResult {
    pub centroids: Vec<Vec<f64>>,
    /// Cluster index per row; nearest centroid, ties to the lowest index.
    pub assignment: Vec<usize>,
    pub inertia: f64,
    /// Inertia after each Lloyd step (update + reassign).
    pub inertia_history: Vec<f64>,
    /// Lloyd steps where an empty cluster had to be re-seeded; inertia is
    /// allowed to rise across exactly these steps.
    pub repaired_steps: Vec<usize>,
    pub iterations: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(row: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter().enumerate() {
        let d = sq_dist(row, c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

fn total_inertia(m: &FeatureMatrix, centroids: &[Vec<f64>], assignment: &[usize]) -> f64 {
    m.rows
        .iter()
        .zip(assignment)
        .map(|(row, &c)| sq_dist(row, &centroids[c]))
        .sum()
}

/// Seeded k-means++ initialization: first centroid uniform, the rest
/// drawn with probability proportional to squared distance from the
/// nearest chosen centroid.
fn init_plus_plus(m: &FeatureMatrix, k: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let n = m.n_rows();
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    centroids.push(m.rows[rng.gen_range(0..n)].clone());
    let mut d2: Vec<f64> = m.rows.iter().map(|r| sq_dist(r, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let idx = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = n - 1;
            for (i, w) in d2.iter().enumerate() {
                if target < *w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.gen_range(0..n) // all points coincide with a centroid
        };
        centroids.push(m.rows[idx].clone());
        let latest = centroids.last().expect("just pushed");
        for (i, row) in m.rows.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(row, latest));
        }
    }
    centroids
}

/// Lloyd's algorithm with k-means++ seeding. Runs until the assignment
/// reaches a fixpoint or `max_iter` steps.
pub fn kmeans(
    m: &FeatureMatrix,
    k: usize,
    seed: u64,
    max_iter: usize,
) -> Result<KMeansResult, LearnError> {
    let n = m.n_rows();
    if k < 1 {
        return Err(LearnError::InvalidParam("k must be >= 1".into()));
    }
    if k > n {
        return Err(LearnError::InvalidParam(format!(
            "k = {k} exceeds {n} rows"
        )));
    }

    let mut rng = rngs::stream(seed, TAG_KMEANS, 0);
    let mut centroids = init_plus_plus(m, k, &mut rng);
    let mut assignment: Vec<usize> = m.rows.iter().map(|r| nearest(r, &centroids).0).collect();
    let mut history = vec![total_inertia(m, &centroids, &assignment)];
    let mut repaired_steps = Vec::new();

    let mut iterations = 0;
    for step in 0..max_iter {
        // update step: centroid = mean of its members
        let d = m.n_cols();
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (row, &c) in m.rows.iter().zip(&assignment) {
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(row) {
                *s += v;
            }
        }
        let mut repaired = false;
        for c in 0..k {
            if counts[c] == 0 {
                // re-seed an empty cluster at the point farthest from its
                // former centroid
                let far = m
                    .rows
                    .iter()
                    .enumerate()
                    .max_by(|a, b| {
                        sq_dist(a.1, &centroids[c])
                            .partial_cmp(&sq_dist(b.1, &centroids[c]))
                            .expect("finite distances")
                    })
                    .map(|(i, _)| i)
                    .expect("non-empty data");
                centroids[c] = m.rows[far].clone();
                repaired = true;
            } else {
                for (j, s) in sums[c].iter().enumerate() {
                    centroids[c][j] = s / counts[c] as f64;
                }
            }
        }

        let new_assignment: Vec<usize> = m.rows.iter().map(|r| nearest(r, &centroids).0).collect();
        history.push(total_inertia(m, &centroids, &new_assignment));
        if repaired {
            repaired_steps.push(step);
        }
        iterations = step + 1;
        let converged = new_assignment == assignment;
        assignment = new_assignment;
        if converged {
            break;
        }
    }

    let inertia = total_inertia(m, &centroids, &assignment);
    Ok(KMeansResult {
        centroids,
        assignment,
        inertia,
        inertia_history: history,
        repaired_steps,
        iterations,
    })
}
