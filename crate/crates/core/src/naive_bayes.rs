//! Gaussian naive Bayes for two classes.
//!
//! Each feature is modelled per class as an independent normal with the
//! class mean and population variance. Variances are floored by
//! `var_smoothing · max_j Var(feature_j)`, the largest per-feature variance
//! over all training rows. Posteriors come from log-joint densities.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dataset::EncodedDataset;
use crate::error::{Error, Result};

pub const DEFAULT_VAR_SMOOTHING: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNbModel {
    /// Class priors, indexed by label.
    pub priors: [f64; 2],
    pub means: [Vec<f64>; 2],
    pub variances: [Vec<f64>; 2],
    pub var_smoothing: f64,
}

impl GaussianNbModel {
    pub fn fit(train: &EncodedDataset, var_smoothing: f64) -> Result<Self> {
        if !(var_smoothing >= 0.0 && var_smoothing.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "var_smoothing {var_smoothing} must be a finite non-negative number"
            )));
        }
        train.require_both_classes()?;
        let d = train.n_features();
        let n = train.len();

        let mut counts = [0usize; 2];
        let mut means = [vec![0.0; d], vec![0.0; d]];
        for (row, &y) in train.features.iter_rows().zip(&train.labels) {
            let c = y as usize;
            counts[c] += 1;
            for j in 0..d {
                means[c][j] += row[j];
            }
        }
        for c in 0..2 {
            for m in &mut means[c] {
                *m /= counts[c] as f64;
            }
        }

        // two-pass population variance, per class and overall
        let mut variances = [vec![0.0; d], vec![0.0; d]];
        let overall_mean: Vec<f64> = (0..d)
            .map(|j| (means[0][j] * counts[0] as f64 + means[1][j] * counts[1] as f64) / n as f64)
            .collect();
        let mut overall_var = vec![0.0; d];
        for (row, &y) in train.features.iter_rows().zip(&train.labels) {
            let c = y as usize;
            for j in 0..d {
                let dc = row[j] - means[c][j];
                variances[c][j] += dc * dc;
                let dall = row[j] - overall_mean[j];
                overall_var[j] += dall * dall;
            }
        }
        let max_var = overall_var
            .iter()
            .map(|v| v / n as f64)
            .fold(0.0, f64::max);
        let mut epsilon = var_smoothing * max_var;
        if epsilon <= 0.0 {
            // every feature is constant; keep densities finite
            epsilon = var_smoothing.max(f64::MIN_POSITIVE);
        }
        for c in 0..2 {
            for v in &mut variances[c] {
                *v = *v / counts[c] as f64 + epsilon;
            }
        }

        Ok(GaussianNbModel {
            priors: [counts[0] as f64 / n as f64, counts[1] as f64 / n as f64],
            means,
            variances,
            var_smoothing,
        })
    }

    pub fn n_features(&self) -> usize {
        self.means[0].len()
    }

    /// Log prior plus summed log Gaussian densities, for class 0 and class 1.
    pub fn log_joint(&self, x: &[f64]) -> Result<[f64; 2]> {
        if x.len() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                found: x.len(),
            });
        }
        let mut out = [0.0; 2];
        for (c, slot) in out.iter_mut().enumerate() {
            let mut acc = self.priors[c].ln();
            for ((&v, &mu), &var) in x.iter().zip(&self.means[c]).zip(&self.variances[c]) {
                let diff = v - mu;
                acc += -0.5 * (2.0 * PI * var).ln() - diff * diff / (2.0 * var);
            }
            *slot = acc;
        }
        Ok(out)
    }

    /// Posterior probabilities of class 0 and class 1.
    pub fn posteriors(&self, x: &[f64]) -> Result<[f64; 2]> {
        Ok(posteriors_from_log_joint(self.log_joint(x)?))
    }

    /// Posterior probability of class 1.
    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        Ok(self.posteriors(x)?[1])
    }

    pub fn predict(&self, x: &[f64]) -> Result<u8> {
        let [l0, l1] = self.log_joint(x)?;
        Ok(if l1 > l0 { 1 } else { 0 })
    }
}

/// Two-way softmax, shifted by the maximum.
pub fn posteriors_from_log_joint(log_joint: [f64; 2]) -> [f64; 2] {
    let m = log_joint[0].max(log_joint[1]);
    let e0 = (log_joint[0] - m).exp();
    let e1 = (log_joint[1] - m).exp();
    let z = e0 + e1;
    [e0 / z, e1 / z]
}
