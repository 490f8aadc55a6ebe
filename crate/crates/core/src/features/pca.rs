use serde::{Deserialize, Serialize};

use super::{FeatureError, FeatureMatrix};

const CONVERGENCE_EPS: f64 = 1e-10;
const MAX_ITERS: usize = 10_000;

/// Principal components of a feature matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Pca {
    pub columns: Vec<String>,
    /// Column means subtracted before projection.
    pub mean: Vec<f64>,
    /// k orthonormal eigenvectors of the sample covariance, one per row,
    /// ordered by non-increasing explained variance.
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
}

impl Pca {
    /// Projects rows onto the components: (x - mean) . component_i.
    pub fn project(&self, m: &FeatureMatrix) -> Result<FeatureMatrix, FeatureError> {
        if m.columns != self.columns {
            return Err(FeatureError::ColumnMismatch(format!(
                "pca fit on [{}], matrix has [{}]",
                self.columns.join(","),
                m.columns.join(",")
            )));
        }
        let rows = m
            .rows
            .iter()
            .map(|row| {
                self.components
                    .iter()
                    .map(|c| {
                        row.iter()
                            .zip(c)
                            .zip(&self.mean)
                            .map(|((x, w), mu)| (x - mu) * w)
                            .sum()
                    })
                    .collect()
            })
            .collect();
        let columns = (0..self.components.len())
            .map(|i| format!("pc{}", i + 1))
            .collect();
        Ok(FeatureMatrix {
            sim_ids: m.sim_ids.clone(),
            columns,
            rows,
        })
    }

    /// Back-projects a projected matrix into feature space.
    pub fn reconstruct(&self, projected: &FeatureMatrix) -> Vec<Vec<f64>> {
        projected
            .rows
            .iter()
            .map(|z| {
                let mut x = self.mean.clone();
                for (zi, comp) in z.iter().zip(&self.components) {
                    for (xj, cj) in x.iter_mut().zip(comp) {
                        *xj += zi * cj;
                    }
                }
                x
            })
            .collect()
    }
}

/// Top-k PCA of the sample covariance via power iteration with deflation.
///
/// Returns the fitted components and the projected (centered) data.
pub fn pca(m: &FeatureMatrix, k: usize) -> Result<(Pca, FeatureMatrix), FeatureError> {
    let d = m.n_cols();
    if k < 1 || k > d {
        return Err(FeatureError::KOutOfRange { k, max: d });
    }
    let n = m.n_rows();
    if n < 2 {
        return Err(FeatureError::TooFewRows { need: 2, got: n });
    }

    let mut mean = vec![0.0; d];
    for row in &m.rows {
        for (j, v) in row.iter().enumerate() {
            mean[j] += v;
        }
    }
    for mj in &mut mean {
        *mj /= n as f64;
    }

    // sample covariance, (n-1) denominator
    let mut cov = vec![vec![0.0; d]; d];
    for row in &m.rows {
        let centered: Vec<f64> = row.iter().zip(&mean).map(|(v, mu)| v - mu).collect();
        for (a, ca) in centered.iter().enumerate() {
            for (b, cb) in centered.iter().enumerate().skip(a) {
                cov[a][b] += ca * cb;
            }
        }
    }
    #[allow(clippy::needless_range_loop)] // mirrors the upper triangle
    for a in 0..d {
        for b in a..d {
            cov[a][b] /= (n - 1) as f64;
            cov[b][a] = cov[a][b];
        }
    }

    let mut components: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut explained = Vec::with_capacity(k);
    let mut work = cov;
    for comp_idx in 0..k {
        let (v, lambda) = dominant_eigenpair(&work, &components, comp_idx);
        deflate(&mut work, &v, lambda);
        components.push(v);
        explained.push(lambda);
    }

    let pca = Pca {
        columns: m.columns.clone(),
        mean,
        components,
        explained_variance: explained,
    };
    let projected = pca.project(m)?;
    Ok((pca, projected))
}

fn dominant_eigenpair(a: &[Vec<f64>], previous: &[Vec<f64>], comp_idx: usize) -> (Vec<f64>, f64) {
    let d = a.len();
    // a deterministic start that is never the zero vector and unlikely to
    // be orthogonal to the dominant eigenvector
    let mut v: Vec<f64> = (0..d)
        .map(|i| 1.0 + 0.5 * ((i + 1 + comp_idx) as f64).sin())
        .collect();
    orthogonalize(&mut v, previous);
    if normalize(&mut v) == 0.0 {
        // degenerate: complete the basis with a unit vector
        v = fallback_direction(d, previous);
    }

    for _ in 0..MAX_ITERS {
        let mut next = mat_vec(a, &v);
        orthogonalize(&mut next, previous);
        let norm = normalize(&mut next);
        if norm == 0.0 {
            // null direction: eigenvalue 0, keep the current orthonormal v
            fix_sign(&mut v);
            return (v, 0.0);
        }
        // convergence is up to sign
        let diff_plus: f64 = v
            .iter()
            .zip(&next)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        let diff_minus: f64 = v
            .iter()
            .zip(&next)
            .map(|(x, y)| (x + y) * (x + y))
            .sum::<f64>()
            .sqrt();
        let done = diff_plus.min(diff_minus) < CONVERGENCE_EPS;
        v = next;
        if done {
            break;
        }
    }
    // Rayleigh quotient; covariance is PSD, clamp numeric dust
    let av = mat_vec(a, &v);
    let lambda = v.iter().zip(&av).map(|(x, y)| x * y).sum::<f64>().max(0.0);
    fix_sign(&mut v);
    (v, lambda)
}

fn fallback_direction(d: usize, previous: &[Vec<f64>]) -> Vec<f64> {
    for axis in 0..d {
        let mut v = vec![0.0; d];
        v[axis] = 1.0;
        orthogonalize(&mut v, previous);
        if normalize(&mut v) > 1e-12 {
            return v;
        }
    }
    let mut v = vec![0.0; d];
    v[0] = 1.0;
    v
}

fn mat_vec(a: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
        for (vi, bi) in v.iter_mut().zip(b) {
            *vi -= dot * bi;
        }
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 1e-300 {
        for x in v.iter_mut() {
            *x /= norm;
        }
        norm
    } else {
        0.0
    }
}

/// Pins the sign: the largest-magnitude entry is positive.
fn fix_sign(v: &mut [f64]) {
    let mut idx = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[idx].abs() {
            idx = i;
        }
    }
    if v[idx] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

fn deflate(a: &mut [Vec<f64>], v: &[f64], lambda: f64) {
    let d = a.len();
    for i in 0..d {
        for j in 0..d {
            a[i][j] -= lambda * v[i] * v[j];
        }
    }
}
