//! From-scratch MLP regression: ReLU hidden layers, linear output,
//! mean-squared-error loss, backpropagation and Adam updates. A trained
//! model is the NN-proxy that stands in for a true benchmark function.

mod serialize;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::benchmarks::BenchmarkFn;
use crate::error::{Error, Result};
use crate::sampling::SampleSet;

/// Affine maps applied around the network: inputs to [-1,1] per axis,
/// targets standardized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationSpec {
    pub input_center: Vec<f64>,
    pub input_halfrange: Vec<f64>,
    pub target_mean: f64,
    pub target_std: f64,
}

impl NormalizationSpec {
    pub fn identity(dim: usize) -> Self {
        NormalizationSpec {
            input_center: vec![0.0; dim],
            input_halfrange: vec![1.0; dim],
            target_mean: 0.0,
            target_std: 1.0,
        }
    }

    pub fn fit(lower: &[f64], upper: &[f64], targets: &[f64]) -> Self {
        let n = targets.len() as f64;
        let mean = targets.iter().sum::<f64>() / n;
        let var = targets.iter().map(|&t| (t - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt();
        NormalizationSpec {
            input_center: lower
                .iter()
                .zip(upper)
                .map(|(&l, &u)| 0.5 * (l + u))
                .collect(),
            input_halfrange: lower
                .iter()
                .zip(upper)
                .map(|(&l, &u)| 0.5 * (u - l))
                .collect(),
            target_mean: mean,
            // Constant-target sets degenerate to std 0; keep the map invertible.
            target_std: if std > 1e-12 { std } else { 1.0 },
        }
    }

    pub fn normalize_input(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..x.len() {
            out[i] = (x[i] - self.input_center[i]) / self.input_halfrange[i];
        }
    }

    pub fn normalize_target(&self, y: f64) -> f64 {
        (y - self.target_mean) / self.target_std
    }

    pub fn denormalize_target(&self, y: f64) -> f64 {
        y * self.target_std + self.target_mean
    }
}

/// Gradients shaped exactly like the model parameters.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl Gradients {
    fn is_finite(&self) -> bool {
        self.weights.iter().all(|w| w.iter().all(|v| v.is_finite()))
            && self.biases.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub layer_sizes: Vec<usize>,
    /// Per-layer weight matrices, shaped out x in.
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
    pub norm: NormalizationSpec,
}

impl MlpModel {
    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn num_parameters(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    pub fn parameters_finite(&self) -> bool {
        self.weights.iter().all(|w| w.iter().all(|v| v.is_finite()))
            && self.biases.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }

    /// Scalar prediction at `x` in original function-domain units.
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput);
        }
        let mut a = vec![0.0; x.len()];
        self.norm.normalize_input(x, &mut a);
        let last = self.weights.len() - 1;
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut next = vec![0.0; w.nrows()];
            for (j, nj) in next.iter_mut().enumerate() {
                let mut acc = b[j];
                let wrow = w.row(j);
                for (k, &ak) in a.iter().enumerate() {
                    acc += wrow[k] * ak;
                }
                *nj = if l < last { acc.max(0.0) } else { acc };
            }
            a = next;
        }
        Ok(self.norm.denormalize_target(a[0]))
    }

    /// Batch forward in normalized space. Returns per-layer post-activation
    /// outputs; `activations[0]` is the input batch itself.
    fn forward_batch(&self, x_norm: &Array2<f64>) -> Vec<Array2<f64>> {
        let last = self.weights.len() - 1;
        let mut activations = Vec::with_capacity(self.weights.len() + 1);
        activations.push(x_norm.clone());
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = activations[l].dot(&w.t());
            z += &b.view().insert_axis(Axis(0));
            if l < last {
                z.mapv_inplace(|v| v.max(0.0));
            }
            activations.push(z);
        }
        activations
    }

    /// Mean-squared-error loss and parameter gradients over a batch given in
    /// original units.
    pub fn loss_and_gradients(
        &self,
        inputs: ArrayView2<'_, f64>,
        targets: &[f64],
    ) -> Result<(f64, Gradients)> {
        if inputs.nrows() == 0 {
            return Err(Error::ShapeMismatch("empty batch".to_string()));
        }
        if inputs.nrows() != targets.len() || inputs.ncols() != self.input_dim() {
            return Err(Error::ShapeMismatch(format!(
                "batch {}x{} vs {} targets, input width {}",
                inputs.nrows(),
                inputs.ncols(),
                targets.len(),
                self.input_dim()
            )));
        }
        let n = inputs.nrows();
        let d = inputs.ncols();
        let mut x_norm = Array2::zeros((n, d));
        let mut buf = vec![0.0; d];
        for (i, row) in inputs.rows().into_iter().enumerate() {
            self.norm.normalize_input(row.as_slice().unwrap(), &mut buf);
            for j in 0..d {
                x_norm[[i, j]] = buf[j];
            }
        }
        let y_norm: Vec<f64> = targets.iter().map(|&t| self.norm.normalize_target(t)).collect();
        self.loss_and_gradients_norm(&x_norm, &y_norm)
    }

    /// Core backprop on already-normalized data.
    pub(crate) fn loss_and_gradients_norm(
        &self,
        x_norm: &Array2<f64>,
        y_norm: &[f64],
    ) -> Result<(f64, Gradients)> {
        let n = x_norm.nrows();
        let activations = self.forward_batch(x_norm);
        let preds = activations.last().unwrap();

        let mut loss = 0.0;
        let mut delta = Array2::zeros((n, 1));
        for i in 0..n {
            let err = preds[[i, 0]] - y_norm[i];
            loss += err * err;
            delta[[i, 0]] = 2.0 * err / n as f64;
        }
        loss /= n as f64;

        let num_layers = self.weights.len();
        let mut grad_w: Vec<Array2<f64>> = Vec::with_capacity(num_layers);
        let mut grad_b: Vec<Array1<f64>> = Vec::with_capacity(num_layers);
        for l in (0..num_layers).rev() {
            grad_w.push(delta.t().dot(&activations[l]));
            grad_b.push(delta.sum_axis(Axis(0)));
            if l > 0 {
                let mut prev = delta.dot(&self.weights[l]);
                // ReLU mask: activation is zero exactly where the unit was off.
                prev.zip_mut_with(&activations[l], |d, &a| {
                    if a <= 0.0 {
                        *d = 0.0;
                    }
                });
                delta = prev;
            }
        }
        grad_w.reverse();
        grad_b.reverse();
        Ok((
            loss,
            Gradients {
                weights: grad_w,
                biases: grad_b,
            },
        ))
    }
}

/// He-initialized MLP with the given `[input, hidden..., 1]` layer sizes.
pub fn build_mlp(layer_sizes: &[usize], seed: u64) -> Result<MlpModel> {
    if layer_sizes.len() < 3 {
        return Err(Error::InvalidArchitecture(format!(
            "need at least one hidden layer, got sizes {layer_sizes:?}"
        )));
    }
    if layer_sizes.iter().any(|&s| s == 0) {
        return Err(Error::InvalidArchitecture("zero-width layer".to_string()));
    }
    if *layer_sizes.last().unwrap() != 1 {
        return Err(Error::InvalidArchitecture(format!(
            "output width must be 1, got {}",
            layer_sizes.last().unwrap()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for pair in layer_sizes.windows(2) {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let dist = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).unwrap();
        weights.push(Array2::from_shape_fn((fan_out, fan_in), |_| {
            dist.sample(&mut rng)
        }));
        biases.push(Array1::zeros(fan_out));
    }
    Ok(MlpModel {
        layer_sizes: layer_sizes.to_vec(),
        weights,
        biases,
        norm: NormalizationSpec::identity(layer_sizes[0]),
    })
}

#[derive(Debug, Clone)]
pub struct AdamState {
    pub m_w: Vec<Array2<f64>>,
    pub v_w: Vec<Array2<f64>>,
    pub m_b: Vec<Array1<f64>>,
    pub v_b: Vec<Array1<f64>>,
    pub step_count: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(model: &MlpModel, learning_rate: f64) -> Self {
        AdamState {
            m_w: model.weights.iter().map(|w| Array2::zeros(w.dim())).collect(),
            v_w: model.weights.iter().map(|w| Array2::zeros(w.dim())).collect(),
            m_b: model.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
            v_b: model.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
            step_count: 0,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// One Adam update with bias correction.
pub fn adam_step(model: &mut MlpModel, grads: &Gradients, state: &mut AdamState) -> Result<()> {
    if !grads.is_finite() {
        return Err(Error::TrainingDiverged {
            epoch: state.step_count as usize,
        });
    }
    state.step_count += 1;
    let t = state.step_count as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);
    let (b1, b2, lr, eps) = (state.beta1, state.beta2, state.learning_rate, state.epsilon);

    for l in 0..model.weights.len() {
        update_inplace(
            model.weights[l].as_slice_mut().unwrap(),
            grads.weights[l].as_slice().unwrap(),
            state.m_w[l].as_slice_mut().unwrap(),
            state.v_w[l].as_slice_mut().unwrap(),
            b1, b2, lr, eps, bc1, bc2,
        );
        update_inplace(
            model.biases[l].as_slice_mut().unwrap(),
            grads.biases[l].as_slice().unwrap(),
            state.m_b[l].as_slice_mut().unwrap(),
            state.v_b[l].as_slice_mut().unwrap(),
            b1, b2, lr, eps, bc1, bc2,
        );
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn update_inplace(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    b1: f64,
    b2: f64,
    lr: f64,
    eps: f64,
    bc1: f64,
    bc2: f64,
) {
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = b1 * m[i] + (1.0 - b1) * g;
        v[i] = b2 * v[i] + (1.0 - b2) * g * g;
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + eps);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            batch_size: 64,
            learning_rate: 1e-3,
            seed: 0,
            shuffle: true,
        }
    }
}

/// Fit normalization from the samples, then run mini-batch Adam for the
/// configured number of epochs. Returns per-epoch mean training loss in
/// normalized units.
pub fn train(model: &mut MlpModel, samples: &SampleSet, config: &TrainConfig) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::ShapeMismatch("empty sample set".to_string()));
    }
    if samples.dim() != model.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.input_dim(),
            got: samples.dim(),
        });
    }
    if config.epochs == 0 || config.batch_size == 0 {
        return Err(Error::InvalidParameter {
            name: "train config",
            reason: "epochs and batch_size must be >= 1".to_string(),
        });
    }
    model.norm = NormalizationSpec::fit(&samples.spec.lower, &samples.spec.upper, &samples.targets);

    let n = samples.len();
    let d = samples.dim();
    let mut x_norm = Array2::zeros((n, d));
    let mut buf = vec![0.0; d];
    for (i, row) in samples.inputs.rows().into_iter().enumerate() {
        model.norm.normalize_input(row.as_slice().unwrap(), &mut buf);
        for j in 0..d {
            x_norm[[i, j]] = buf[j];
        }
    }
    let y_norm: Vec<f64> = samples
        .targets
        .iter()
        .map(|&t| model.norm.normalize_target(t))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut state = AdamState::new(model, config.learning_rate);
    let mut indices: Vec<usize> = (0..n).collect();
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        if config.shuffle {
            indices.shuffle(&mut rng);
        }
        let mut epoch_loss = 0.0;
        for chunk in indices.chunks(config.batch_size) {
            let mut xb = Array2::zeros((chunk.len(), d));
            let mut yb = Vec::with_capacity(chunk.len());
            for (bi, &si) in chunk.iter().enumerate() {
                xb.row_mut(bi).assign(&x_norm.row(si));
                yb.push(y_norm[si]);
            }
            let (loss, grads) = model.loss_and_gradients_norm(&xb, &yb)?;
            if !loss.is_finite() {
                return Err(Error::TrainingDiverged { epoch });
            }
            adam_step(model, &grads, &mut state).map_err(|_| Error::TrainingDiverged { epoch })?;
            epoch_loss += loss * chunk.len() as f64;
        }
        epoch_loss /= n as f64;
        if !epoch_loss.is_finite() || !model.parameters_finite() {
            return Err(Error::TrainingDiverged { epoch });
        }
        history.push(epoch_loss);
    }
    Ok(history)
}

/// Built-in defaults: hidden layer widths and epoch counts keyed on
/// (function, dimension).
pub fn default_architecture(function: BenchmarkFn, dim: usize) -> (Vec<usize>, usize) {
    let (hidden, epochs): (Vec<usize>, usize) = match function {
        BenchmarkFn::Rosenbrock => {
            if dim <= 2 {
                (vec![15, 50, 15], 100)
            } else if dim <= 4 {
                (vec![15, 50, 15, 10], 100)
            } else {
                (vec![15, 50, 15, 10], 500)
            }
        }
        BenchmarkFn::Rastrigin | BenchmarkFn::Ackley => (vec![20, 50, 120, 70, 20, 10], 500),
    };
    let mut sizes = Vec::with_capacity(hidden.len() + 2);
    sizes.push(dim);
    sizes.extend(hidden);
    sizes.push(1);
    (sizes, epochs)
}
