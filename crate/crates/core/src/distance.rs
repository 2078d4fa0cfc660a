//! Minkowski-family distances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Metric {
    Manhattan,
    Euclidean,
    Minkowski { p: f64 },
}

impl Default for Metric {
    fn default() -> Self {
        Metric::Manhattan
    }
}

impl Metric {
    pub fn minkowski(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "minkowski exponent p={p} must be >= 1"
            )));
        }
        Ok(Metric::Minkowski { p })
    }

    pub fn distance(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_dims(x, y)?;
        Ok(self.distance_unchecked(x, y))
    }

    /// Distance without the length check; callers guarantee `x.len() == y.len()`.
    #[inline]
    pub fn distance_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            Metric::Manhattan => x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum(),
            Metric::Euclidean => x
                .iter()
                .zip(y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
            Metric::Minkowski { p } => x
                .iter()
                .zip(y)
                .map(|(a, b)| (a - b).abs().powf(p))
                .sum::<f64>()
                .powf(1.0 / p),
        }
    }
}

fn check_dims(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(())
}

pub fn manhattan(x: &[f64], y: &[f64]) -> Result<f64> {
    Metric::Manhattan.distance(x, y)
}

pub fn euclidean(x: &[f64], y: &[f64]) -> Result<f64> {
    Metric::Euclidean.distance(x, y)
}

pub fn minkowski(x: &[f64], y: &[f64], p: f64) -> Result<f64> {
    Metric::minkowski(p)?.distance(x, y)
}
