//! L2-regularised logistic regression fitted by full-batch gradient descent.
//!
//! The objective is the mean negative log-likelihood plus
//! `λ / (2n) · Σ w_i²`; the intercept is not penalised. Features are
//! min-max scaled internally and the scaler travels with the model, so the
//! public methods take raw feature vectors.

use serde::{Deserialize, Serialize};

use crate::dataset::{EncodedDataset, Matrix};
use crate::error::{Error, Result};
use crate::scaling::MinMaxScaler;

/// Probabilities are kept this far from 0 and 1 inside the log terms.
pub const PROB_CLAMP: f64 = 1e-15;

/// Logistic function, split on the sign of `z` so `exp` never overflows.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Binary cross-entropy of one prediction, with clamping.
#[inline]
pub(crate) fn cross_entropy(p: f64, y: u8) -> f64 {
    let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    if y == 1 {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    pub lambda: f64,
    pub learning_rate: f64,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig {
            lambda: 1.0,
            learning_rate: 0.1,
            max_iters: 5000,
            tol: 1e-7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitReport {
    /// Gradient steps taken.
    pub iterations: usize,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub intercept: f64,
    pub weights: Vec<f64>,
    pub lambda: f64,
    pub scaler: MinMaxScaler,
}

impl LogisticModel {
    pub fn from_parts(
        intercept: f64,
        weights: Vec<f64>,
        lambda: f64,
        scaler: MinMaxScaler,
    ) -> Result<Self> {
        if weights.len() != scaler.dim() {
            return Err(Error::DimensionMismatch {
                expected: scaler.dim(),
                found: weights.len(),
            });
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("lambda {lambda} must be >= 0")));
        }
        Ok(LogisticModel {
            intercept,
            weights,
            lambda,
            scaler,
        })
    }

    pub fn fit(train: &EncodedDataset, config: &LogisticConfig) -> Result<Self> {
        Ok(Self::fit_with_report(train, config)?.0)
    }

    pub fn fit_with_report(
        train: &EncodedDataset,
        config: &LogisticConfig,
    ) -> Result<(Self, FitReport)> {
        validate(config)?;
        train.require_both_classes()?;
        let scaler = MinMaxScaler::fit(&train.features)?;
        let scaled = scaler.transform_matrix(&train.features)?;
        let d = train.n_features();

        let mut params = Params {
            intercept: 0.0,
            weights: vec![0.0; d],
        };
        let mut grad = Params {
            intercept: 0.0,
            weights: vec![0.0; d],
        };
        let mut previous: Option<f64> = None;
        let mut initial_loss = f64::NAN;
        let mut iterations = 0;
        let mut converged = false;
        let final_loss = loop {
            let loss = loss_and_gradient(&params, config.lambda, &scaled, &train.labels, &mut grad);
            if !loss.is_finite() {
                return Err(Error::Diverged(iterations));
            }
            match previous {
                None => initial_loss = loss,
                Some(prev) if (prev - loss).abs() < config.tol => {
                    converged = true;
                    break loss;
                }
                Some(_) => {}
            }
            if iterations == config.max_iters {
                break loss;
            }
            previous = Some(loss);
            params.intercept -= config.learning_rate * grad.intercept;
            for (w, g) in params.weights.iter_mut().zip(&grad.weights) {
                *w -= config.learning_rate * g;
            }
            iterations += 1;
            if !params.intercept.is_finite() || params.weights.iter().any(|w| !w.is_finite()) {
                return Err(Error::Diverged(iterations));
            }
        };

        let model = LogisticModel {
            intercept: params.intercept,
            weights: params.weights,
            lambda: config.lambda,
            scaler,
        };
        Ok((
            model,
            FitReport {
                iterations,
                initial_loss,
                final_loss,
                converged,
            },
        ))
    }

    pub fn n_features(&self) -> usize {
        self.weights.len()
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                found,
            });
        }
        Ok(())
    }

    /// Probability of class 1 for a raw feature vector.
    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        let scaled = self.scaler.transform(x)?;
        Ok(sigmoid(self.linear(&scaled)))
    }

    pub fn predict(&self, x: &[f64]) -> Result<u8> {
        Ok(u8::from(self.predict_proba(x)? > 0.5))
    }

    fn linear(&self, scaled: &[f64]) -> f64 {
        self.intercept
            + self
                .weights
                .iter()
                .zip(scaled)
                .map(|(w, v)| w * v)
                .sum::<f64>()
    }

    fn params(&self) -> Params {
        Params {
            intercept: self.intercept,
            weights: self.weights.clone(),
        }
    }

    fn scaled(&self, data: &EncodedDataset) -> Result<Matrix> {
        if data.is_empty() {
            return Err(Error::Empty("logistic loss needs at least one row"));
        }
        self.check_dim(data.n_features())?;
        self.scaler.transform_matrix(&data.features)
    }

    /// Regularised mean negative log-likelihood on raw data.
    pub fn loss(&self, data: &EncodedDataset) -> Result<f64> {
        let scaled = self.scaled(data)?;
        let mut grad = Params {
            intercept: 0.0,
            weights: vec![0.0; self.n_features()],
        };
        Ok(loss_and_gradient(&self.params(), self.lambda, &scaled, &data.labels, &mut grad))
    }

    /// Gradient of [`LogisticModel::loss`] with respect to (intercept, weights).
    pub fn gradient(&self, data: &EncodedDataset) -> Result<(f64, Vec<f64>)> {
        let scaled = self.scaled(data)?;
        let mut grad = Params {
            intercept: 0.0,
            weights: vec![0.0; self.n_features()],
        };
        loss_and_gradient(&self.params(), self.lambda, &scaled, &data.labels, &mut grad);
        Ok((grad.intercept, grad.weights))
    }
}

fn validate(config: &LogisticConfig) -> Result<()> {
    if !(config.lambda >= 0.0) || !config.lambda.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "lambda {} must be >= 0",
            config.lambda
        )));
    }
    if !(config.learning_rate > 0.0) || !config.learning_rate.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "learning rate {} must be > 0",
            config.learning_rate
        )));
    }
    if !(config.tol >= 0.0) {
        return Err(Error::InvalidParameter(format!("tol {} must be >= 0", config.tol)));
    }
    Ok(())
}

struct Params {
    intercept: f64,
    weights: Vec<f64>,
}

/// Loss at `params` on pre-scaled rows; the gradient is written to `grad`.
fn loss_and_gradient(
    params: &Params,
    lambda: f64,
    scaled: &Matrix,
    labels: &[u8],
    grad: &mut Params,
) -> f64 {
    let n = labels.len() as f64;
    grad.intercept = 0.0;
    grad.weights.iter_mut().for_each(|g| *g = 0.0);
    let mut data_loss = 0.0;
    for (row, &y) in scaled.iter_rows().zip(labels) {
        let z = params.intercept
            + params
                .weights
                .iter()
                .zip(row)
                .map(|(w, v)| w * v)
                .sum::<f64>();
        let p = sigmoid(z);
        data_loss += cross_entropy(p, y);
        let residual = p - y as f64;
        grad.intercept += residual;
        for (g, v) in grad.weights.iter_mut().zip(row) {
            *g += residual * v;
        }
    }
    grad.intercept /= n;
    for (g, w) in grad.weights.iter_mut().zip(&params.weights) {
        *g = *g / n + lambda / n * w;
    }
    let penalty = lambda / (2.0 * n) * params.weights.iter().map(|w| w * w).sum::<f64>();
    data_loss / n + penalty
}

#[cfg(test)]
mod tests {
    use super::*;

    fn separable() -> EncodedDataset {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..50 {
            rows.push(vec![0.0]);
            labels.push(0);
            rows.push(vec![1.0]);
            labels.push(1);
        }
        EncodedDataset::from_rows(&rows, &labels).unwrap()
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!((sigmoid(3f64.ln()) - 0.75).abs() < 1e-15);
        for z in [-1000.0, -745.0, -700.0, 700.0, 1000.0] {
            let s = sigmoid(z);
            assert!(s.is_finite() && (0.0..=1.0).contains(&s));
        }
        assert!(sigmoid(-700.0) > 0.0);
        assert!(sigmoid(30.0) < 1.0);
    }

    #[test]
    fn zero_model_predicts_half() {
        let m = LogisticModel::from_parts(0.0, vec![0.0; 3], 1.0, MinMaxScaler::identity(3)).unwrap();
        assert_eq!(m.predict_proba(&[5.0, -2.0, 1e6]).unwrap(), 0.5);
        let m = LogisticModel::from_parts(0.0, vec![3f64.ln()], 0.0, MinMaxScaler::identity(1)).unwrap();
        assert!((m.predict_proba(&[1.0]).unwrap() - 0.75).abs() < 1e-15);
        let m = LogisticModel::from_parts(-1000.0, vec![0.0], 0.0, MinMaxScaler::identity(1)).unwrap();
        let p = m.predict_proba(&[1.0]).unwrap();
        assert!(p.is_finite() && p >= 0.0 && p < 1.0);
        assert!(m.predict_proba(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn zero_model_loss_is_ln2() {
        let ds = separable();
        let m = LogisticModel::from_parts(0.0, vec![0.0], 1.0, MinMaxScaler::identity(1)).unwrap();
        assert!((m.loss(&ds).unwrap() - 2f64.ln()).abs() < 1e-15);
        let (g0, g) = m.gradient(&ds).unwrap();
        // mean of (0.5 - y) and (0.5 - y)·x
        assert!((g0 - 0.0).abs() < 1e-15);
        assert!((g[0] - (-0.25)).abs() < 1e-15);
    }

    #[test]
    fn penalty_raises_loss() {
        let ds = separable();
        let free = LogisticModel::from_parts(0.1, vec![2.0], 0.0, MinMaxScaler::identity(1)).unwrap();
        let pen = LogisticModel::from_parts(0.1, vec![2.0], 1.0, MinMaxScaler::identity(1)).unwrap();
        assert!(pen.loss(&ds).unwrap() > free.loss(&ds).unwrap());
    }

    #[test]
    fn empty_data_is_an_error() {
        let m = LogisticModel::from_parts(0.0, vec![0.0], 1.0, MinMaxScaler::identity(1)).unwrap();
        let empty = separable().subset(&[]);
        assert!(m.loss(&empty).is_err());
        assert!(m.gradient(&empty).is_err());
    }

    #[test]
    fn separable_toy_is_learned() {
        let ds = separable();
        let cfg = LogisticConfig {
            lambda: 0.0,
            learning_rate: 1.0,
            max_iters: 20_000,
            tol: 1e-12,
        };
        let (m, report) = LogisticModel::fit_with_report(&ds, &cfg).unwrap();
        assert!(report.final_loss <= report.initial_loss);
        assert!((report.initial_loss - 2f64.ln()).abs() < 1e-15);
        let correct = ds
            .features
            .iter_rows()
            .zip(&ds.labels)
            .filter(|(r, &y)| m.predict(r).unwrap() == y)
            .count();
        assert_eq!(correct, ds.len());
        assert!(m.loss(&ds).unwrap() < 0.01);
    }

    #[test]
    fn fit_is_deterministic() {
        let ds = separable();
        let cfg = LogisticConfig::default();
        let a = LogisticModel::fit(&ds, &cfg).unwrap();
        let b = LogisticModel::fit(&ds, &cfg).unwrap();
        assert_eq!(a.intercept.to_bits(), b.intercept.to_bits());
        assert_eq!(a.weights[0].to_bits(), b.weights[0].to_bits());
    }

    #[test]
    fn gradient_vanishes_at_optimum() {
        let rows = vec![vec![0.0, 1.0], vec![0.3, 0.2], vec![0.9, 0.5], vec![1.0, 0.0], vec![0.5, 0.7]];
        let ds = EncodedDataset::from_rows(&rows, &[0, 1, 1, 0, 1]).unwrap();
        let cfg = LogisticConfig {
            lambda: 0.5,
            learning_rate: 0.5,
            max_iters: 200_000,
            tol: 0.0,
        };
        let m = LogisticModel::fit(&ds, &cfg).unwrap();
        let (g0, g) = m.gradient(&ds).unwrap();
        let norm = (g0 * g0 + g.iter().map(|v| v * v).sum::<f64>()).sqrt();
        assert!(norm < 1e-5, "gradient norm {norm}");
    }

    #[test]
    fn one_class_is_rejected() {
        let ds = EncodedDataset::from_rows(&[vec![0.0], vec![1.0]], &[0, 0]).unwrap();
        assert!(matches!(
            LogisticModel::fit(&ds, &LogisticConfig::default()),
            Err(Error::MissingClass(1))
        ));
    }

    #[test]
    fn huge_learning_rate_diverges() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        let labels: Vec<u8> = (0..20).map(|i| (i % 2) as u8).collect();
        let ds = EncodedDataset::from_rows(&rows, &labels).unwrap();
        let cfg = LogisticConfig {
            learning_rate: f64::MAX,
            ..LogisticConfig::default()
        };
        assert!(matches!(
            LogisticModel::fit(&ds, &cfg),
            Err(Error::Diverged(_))
        ));
    }
}
