use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cdr::Label;
use crate::features::FeatureMatrix;
use crate::rngs;

use super::LearnError;

const TAG_MLP: u64 = 0x4d4c50;

/// Two hidden layers of five sigmoid units each.
pub const MLP_HIDDEN: [usize; 2] = [5, 5];
pub const MLP_LEARNING_RATE: f64 = 0.6;
pub const MLP_MOMENTUM: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub epochs: usize,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams { epochs: 500 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpLayer {
    /// weights[out][in]
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

/// Fixed-architecture sigmoid MLP, [n_features, 5, 5, 1], trained by
/// full-batch gradient descent with classic momentum on the halved
/// batch-summed squared error 1/2 sum (out - target)^2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layer_sizes: Vec<usize>,
    pub layers: Vec<MlpLayer>,
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs_trained: usize,
}

/// Per-layer loss gradients, same shapes as the layers.
#[derive(Debug, Clone)]
pub struct MlpGradients {
    pub layers: Vec<MlpLayer>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn target_of(label: Label) -> f64 {
    match label {
        Label::Fraud => 1.0,
        Label::Normal => 0.0,
    }
}

impl MlpModel {
    /// Fresh network with weights and biases uniform in [-0.5, 0.5].
    pub fn init(n_features: usize, seed: u64) -> MlpModel {
        let mut rng = rngs::stream(seed, TAG_MLP, 0);
        let layer_sizes = vec![n_features, MLP_HIDDEN[0], MLP_HIDDEN[1], 1];
        let layers = layer_sizes
            .windows(2)
            .map(|w| {
                let (n_in, n_out) = (w[0], w[1]);
                let weights = (0..n_out)
                    .map(|_| (0..n_in).map(|_| rng.gen_range(-0.5..=0.5)).collect())
                    .collect();
                let bias = (0..n_out).map(|_| rng.gen_range(-0.5..=0.5)).collect();
                MlpLayer { weights, bias }
            })
            .collect();
        MlpModel {
            layer_sizes,
            layers,
            learning_rate: MLP_LEARNING_RATE,
            momentum: MLP_MOMENTUM,
            epochs_trained: 0,
        }
    }

    /// Activations of every layer, input first.
    fn forward(&self, row: &[f64]) -> Vec<Vec<f64>> {
        let mut acts: Vec<Vec<f64>> = vec![row.to_vec()];
        for layer in &self.layers {
            let prev = acts.last().expect("input activation present");
            let next: Vec<f64> = layer
                .weights
                .iter()
                .zip(&layer.bias)
                .map(|(wrow, b)| {
                    sigmoid(wrow.iter().zip(prev).map(|(w, x)| w * x).sum::<f64>() + b)
                })
                .collect();
            acts.push(next);
        }
        acts
    }

    pub fn output(&self, row: &[f64]) -> f64 {
        self.forward(row).last().expect("output layer")[0]
    }

    /// output > 0.5 is FRAUD; the tie at exactly 0.5 resolves to NORMAL.
    pub fn predict_row(&self, row: &[f64]) -> Label {
        if self.output(row) > 0.5 {
            Label::Fraud
        } else {
            Label::Normal
        }
    }

    pub fn predict(&self, m: &FeatureMatrix) -> Vec<Label> {
        m.rows.iter().map(|r| self.predict_row(r)).collect()
    }

    pub fn loss(&self, m: &FeatureMatrix, y: &[Label]) -> f64 {
        m.rows
            .iter()
            .zip(y)
            .map(|(row, label)| {
                let diff = self.output(row) - target_of(*label);
                diff * diff
            })
            .sum::<f64>()
            / 2.0
    }

    /// Analytic full-batch gradients of [`loss`](Self::loss) via
    /// backpropagation.
    pub fn gradients(&self, m: &FeatureMatrix, y: &[Label]) -> MlpGradients {
        let mut grads: Vec<MlpLayer> = self
            .layers
            .iter()
            .map(|l| MlpLayer {
                weights: l.weights.iter().map(|r| vec![0.0; r.len()]).collect(),
                bias: vec![0.0; l.bias.len()],
            })
            .collect();

        for (row, label) in m.rows.iter().zip(y) {
            let acts = self.forward(row);
            let out = acts.last().expect("output layer")[0];
            // delta for the output layer: dL/dz = (out - t) * out(1-out)
            let mut delta = vec![(out - target_of(*label)) * out * (1.0 - out)];
            for layer_idx in (0..self.layers.len()).rev() {
                let input = &acts[layer_idx];
                for (unit, d) in delta.iter().enumerate() {
                    for (gw, x) in grads[layer_idx].weights[unit].iter_mut().zip(input) {
                        *gw += d * x;
                    }
                    grads[layer_idx].bias[unit] += d;
                }
                if layer_idx == 0 {
                    break;
                }
                // propagate to the previous layer through this layer's weights
                let prev_act = &acts[layer_idx];
                delta = (0..self.layer_sizes[layer_idx])
                    .map(|i| {
                        let upstream: f64 = delta
                            .iter()
                            .enumerate()
                            .map(|(unit, d)| d * self.layers[layer_idx].weights[unit][i])
                            .sum();
                        upstream * prev_act[i] * (1.0 - prev_act[i])
                    })
                    .collect();
            }
        }
        MlpGradients { layers: grads }
    }
}

/// Trains the fixed [n, 5, 5, 1] network. Returns the model and the loss
/// after every epoch; zero epochs returns the raw initialization with an
/// empty history.
pub fn train_mlp(
    m: &FeatureMatrix,
    y: &[Label],
    params: MlpParams,
    seed: u64,
) -> Result<(MlpModel, Vec<f64>), LearnError> {
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

    let mut model = MlpModel::init(m.n_cols(), seed);
    let mut velocity: Vec<MlpLayer> = model
        .layers
        .iter()
        .map(|l| MlpLayer {
            weights: l.weights.iter().map(|r| vec![0.0; r.len()]).collect(),
            bias: vec![0.0; l.bias.len()],
        })
        .collect();

    let mut history = Vec::with_capacity(params.epochs);
    for epoch in 0..params.epochs {
        let grads = model.gradients(m, y);
        for (layer_idx, grad) in grads.layers.iter().enumerate() {
            let vel = &mut velocity[layer_idx];
            let layer = &mut model.layers[layer_idx];
            for (unit, grow) in grad.weights.iter().enumerate() {
                for (j, g) in grow.iter().enumerate() {
                    vel.weights[unit][j] =
                        MLP_MOMENTUM * vel.weights[unit][j] - MLP_LEARNING_RATE * g;
                    layer.weights[unit][j] += vel.weights[unit][j];
                }
                vel.bias[unit] = MLP_MOMENTUM * vel.bias[unit] - MLP_LEARNING_RATE * grad.bias[unit];
                layer.bias[unit] += vel.bias[unit];
            }
        }
        let loss = model.loss(m, y);
        if !loss.is_finite() {
            return Err(LearnError::MlpDiverged { epoch });
        }
        history.push(loss);
        model.epochs_trained = epoch + 1;
    }
    Ok((model, history))
}
