//! One-hidden-layer perceptron for binary classification.
//!
//! `p = σ(w2 · ReLU(W1 x + b1) + b2)` on min-max scaled inputs, trained on
//! mean binary cross-entropy with mini-batch gradient descent and classical
//! momentum (`v ← μ v − η g; θ ← θ + v`). Weights start from
//! `U(±√(6 / (fan_in + fan_out)))`, biases from zero. The same seeded
//! ChaCha8 stream drives initialisation and the per-epoch shuffles.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{EncodedDataset, Matrix};
use crate::error::{Error, Result};
use crate::logistic::{cross_entropy, sigmoid};
use crate::scaling::MinMaxScaler;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub hidden_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hidden_size: 100,
            learning_rate: 0.01,
            momentum: 0.9,
            batch_size: 200,
            epochs: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub hidden_size: usize,
    /// Hidden weights, row-major `hidden_size × d`.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
    pub scaler: MinMaxScaler,
    pub train_seed: u64,
}

/// Gradients laid out like the model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl Gradients {
    fn zeros(hidden: usize, d: usize) -> Self {
        Gradients {
            w1: vec![0.0; hidden * d],
            b1: vec![0.0; hidden],
            w2: vec![0.0; hidden],
            b2: 0.0,
        }
    }

    fn reset(&mut self) {
        self.w1.iter_mut().for_each(|v| *v = 0.0);
        self.b1.iter_mut().for_each(|v| *v = 0.0);
        self.w2.iter_mut().for_each(|v| *v = 0.0);
        self.b2 = 0.0;
    }

    /// All entries flattened in the order w1, b1, w2, b2.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.w1.len() + 2 * self.b1.len() + 1);
        out.extend_from_slice(&self.w1);
        out.extend_from_slice(&self.b1);
        out.extend_from_slice(&self.w2);
        out.push(self.b2);
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingReport {
    /// Mean training loss of the initial parameters.
    pub initial_loss: f64,
    /// Mean batch loss seen during each epoch.
    pub epoch_losses: Vec<f64>,
}

impl MlpModel {
    pub fn from_parts(
        hidden_size: usize,
        w1: Vec<f64>,
        b1: Vec<f64>,
        w2: Vec<f64>,
        b2: f64,
        scaler: MinMaxScaler,
    ) -> Result<Self> {
        let d = scaler.dim();
        if hidden_size == 0 {
            return Err(Error::InvalidParameter("hidden size must be positive".into()));
        }
        if w1.len() != hidden_size * d || b1.len() != hidden_size || w2.len() != hidden_size {
            return Err(Error::InvalidParameter(
                "parameter shapes do not match hidden size and input dimension".into(),
            ));
        }
        Ok(MlpModel {
            hidden_size,
            w1,
            b1,
            w2,
            b2,
            scaler,
            train_seed: 0,
        })
    }

    pub fn n_features(&self) -> usize {
        self.scaler.dim()
    }

    pub fn fit(train: &EncodedDataset, config: &MlpConfig) -> Result<Self> {
        Ok(Self::fit_with_report(train, config)?.0)
    }

    pub fn fit_with_report(
        train: &EncodedDataset,
        config: &MlpConfig,
    ) -> Result<(Self, TrainingReport)> {
        validate(config)?;
        train.require_both_classes()?;
        let scaler = MinMaxScaler::fit(&train.features)?;
        let scaled = scaler.transform_matrix(&train.features)?;
        let d = train.n_features();
        let h = config.hidden_size;

        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let limit1 = (6.0 / (d + h) as f64).sqrt();
        let limit2 = (6.0 / (h + 1) as f64).sqrt();
        let w1 = (0..h * d).map(|_| rng.gen_range(-limit1..=limit1)).collect();
        let w2 = (0..h).map(|_| rng.gen_range(-limit2..=limit2)).collect();
        let mut model = MlpModel {
            hidden_size: h,
            w1,
            b1: vec![0.0; h],
            w2,
            b2: 0.0,
            scaler,
            train_seed: config.seed,
        };

        let mut grads = Gradients::zeros(h, d);
        let mut velocity = Gradients::zeros(h, d);
        let mut hidden = vec![0.0; h];
        let all: Vec<usize> = (0..train.len()).collect();
        let initial_loss =
            model.accumulate(&scaled, &train.labels, &all, &mut grads, &mut hidden);
        if !initial_loss.is_finite() {
            return Err(Error::Diverged(0));
        }

        let mut order = all;
        let mut epoch_losses = Vec::with_capacity(config.epochs);
        for epoch in 0..config.epochs {
            order.shuffle(&mut rng);
            let mut total = 0.0;
            for batch in order.chunks(config.batch_size) {
                let loss = model.accumulate(&scaled, &train.labels, batch, &mut grads, &mut hidden);
                total += loss * batch.len() as f64;
                model.momentum_step(&grads, &mut velocity, config);
            }
            let mean = total / train.len() as f64;
            if !mean.is_finite() || !model.is_finite() {
                return Err(Error::Diverged(epoch + 1));
            }
            log::debug!("epoch {:>4}  loss {:.6}", epoch + 1, mean);
            epoch_losses.push(mean);
        }

        Ok((
            model,
            TrainingReport {
                initial_loss,
                epoch_losses,
            },
        ))
    }

    fn is_finite(&self) -> bool {
        self.b2.is_finite()
            && self
                .w1
                .iter()
                .chain(&self.b1)
                .chain(&self.w2)
                .all(|v| v.is_finite())
    }

    fn momentum_step(&mut self, grads: &Gradients, velocity: &mut Gradients, config: &MlpConfig) {
        let (mu, lr) = (config.momentum, config.learning_rate);
        let update = |theta: &mut [f64], v: &mut [f64], g: &[f64]| {
            for ((t, v), g) in theta.iter_mut().zip(v.iter_mut()).zip(g) {
                *v = mu * *v - lr * g;
                *t += *v;
            }
        };
        update(&mut self.w1, &mut velocity.w1, &grads.w1);
        update(&mut self.b1, &mut velocity.b1, &grads.b1);
        update(&mut self.w2, &mut velocity.w2, &grads.w2);
        velocity.b2 = mu * velocity.b2 - lr * grads.b2;
        self.b2 += velocity.b2;
    }

    /// Output on an already scaled input; fills `hidden` with the ReLU layer.
    fn forward_scaled(&self, xs: &[f64], hidden: &mut [f64]) -> (f64, f64) {
        let d = xs.len();
        let mut z2 = self.b2;
        for (j, hj) in hidden.iter_mut().enumerate() {
            let row = &self.w1[j * d..(j + 1) * d];
            let z1 = self.b1[j] + row.iter().zip(xs).map(|(w, x)| w * x).sum::<f64>();
            *hj = z1.max(0.0);
            z2 += self.w2[j] * *hj;
        }
        (z2, sigmoid(z2))
    }

    /// Mean loss over `rows` of the scaled matrix; mean gradients into `grads`.
    fn accumulate(
        &self,
        scaled: &Matrix,
        labels: &[u8],
        rows: &[usize],
        grads: &mut Gradients,
        hidden: &mut [f64],
    ) -> f64 {
        grads.reset();
        let d = scaled.n_cols();
        let inv_n = 1.0 / rows.len() as f64;
        let mut loss = 0.0;
        for &i in rows {
            let xs = scaled.row(i);
            let y = labels[i];
            let (_, p) = self.forward_scaled(xs, hidden);
            loss += cross_entropy(p, y);
            let dz2 = (p - y as f64) * inv_n;
            grads.b2 += dz2;
            for j in 0..self.hidden_size {
                grads.w2[j] += dz2 * hidden[j];
                // ReLU subgradient is 0 at 0
                if hidden[j] > 0.0 {
                    let dz1 = dz2 * self.w2[j];
                    grads.b1[j] += dz1;
                    for (g, x) in grads.w1[j * d..(j + 1) * d].iter_mut().zip(xs) {
                        *g += dz1 * x;
                    }
                }
            }
        }
        loss * inv_n
    }

    /// Probability of class 1 for a raw feature vector.
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        let xs = self.scaler.transform(x)?;
        let mut hidden = vec![0.0; self.hidden_size];
        Ok(self.forward_scaled(&xs, &mut hidden).1)
    }

    pub fn predict(&self, x: &[f64]) -> Result<u8> {
        Ok(u8::from(self.forward(x)? > 0.5))
    }

    /// Hidden pre-activations `W1 x + b1` for a raw input.
    pub fn preactivations(&self, x: &[f64]) -> Result<Vec<f64>> {
        let xs = self.scaler.transform(x)?;
        let d = xs.len();
        Ok((0..self.hidden_size)
            .map(|j| {
                self.b1[j]
                    + self.w1[j * d..(j + 1) * d]
                        .iter()
                        .zip(&xs)
                        .map(|(w, x)| w * x)
                        .sum::<f64>()
            })
            .collect())
    }

    fn scaled(&self, batch: &EncodedDataset) -> Result<Matrix> {
        if batch.is_empty() {
            return Err(Error::Empty("gradient batch"));
        }
        if batch.n_features() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                found: batch.n_features(),
            });
        }
        self.scaler.transform_matrix(&batch.features)
    }

    /// Mean cross-entropy over a batch of raw rows.
    pub fn loss(&self, batch: &EncodedDataset) -> Result<f64> {
        Ok(self.loss_and_gradients(batch)?.0)
    }

    /// Backpropagated gradient of the mean cross-entropy over a batch.
    pub fn gradients(&self, batch: &EncodedDataset) -> Result<Gradients> {
        Ok(self.loss_and_gradients(batch)?.1)
    }

    pub fn loss_and_gradients(&self, batch: &EncodedDataset) -> Result<(f64, Gradients)> {
        let scaled = self.scaled(batch)?;
        let mut grads = Gradients::zeros(self.hidden_size, self.n_features());
        let mut hidden = vec![0.0; self.hidden_size];
        let rows: Vec<usize> = (0..batch.len()).collect();
        let loss = self.accumulate(&scaled, &batch.labels, &rows, &mut grads, &mut hidden);
        Ok((loss, grads))
    }
}

fn validate(config: &MlpConfig) -> Result<()> {
    if config.hidden_size == 0 {
        return Err(Error::InvalidParameter("hidden size must be positive".into()));
    }
    if config.batch_size == 0 {
        return Err(Error::InvalidParameter("batch size must be positive".into()));
    }
    if !(config.learning_rate > 0.0) || !config.learning_rate.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "learning rate {} must be > 0",
            config.learning_rate
        )));
    }
    if !(0.0..1.0).contains(&config.momentum) {
        return Err(Error::InvalidParameter(format!(
            "momentum {} must be in [0, 1)",
            config.momentum
        )));
    }
    Ok(())
}
