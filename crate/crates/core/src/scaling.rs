use serde::{Deserialize, Serialize};

use crate::dataset::Matrix;
use crate::error::{Error, Result};

/// Per-feature min-max map onto `[0, 1]`. Constant features map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(features: &Matrix) -> Result<Self> {
        if features.n_rows() == 0 {
            return Err(Error::Empty("cannot fit a scaler on zero rows"));
        }
        let d = features.n_cols();
        let mut min = vec![f64::INFINITY; d];
        let mut max = vec![f64::NEG_INFINITY; d];
        for row in features.iter_rows() {
            for j in 0..d {
                min[j] = min[j].min(row[j]);
                max[j] = max[j].max(row[j]);
            }
        }
        Ok(MinMaxScaler { min, max })
    }

    /// Leaves every value unchanged.
    pub fn identity(d: usize) -> Self {
        MinMaxScaler {
            min: vec![0.0; d],
            max: vec![1.0; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn transform_into(&self, x: &[f64], out: &mut Vec<f64>) {
        out.extend(x.iter().zip(self.min.iter().zip(&self.max)).map(|(&v, (&lo, &hi))| {
            let range = hi - lo;
            if range > 0.0 {
                (v - lo) / range
            } else {
                0.0
            }
        }));
    }

    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        let mut out = Vec::with_capacity(x.len());
        self.transform_into(x, &mut out);
        Ok(out)
    }

    pub fn transform_matrix(&self, m: &Matrix) -> Result<Matrix> {
        if m.n_cols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: m.n_cols(),
            });
        }
        Ok(m.map_rows(|r, out| self.transform_into(r, out)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maps_range_to_unit_interval() {
        let m = Matrix::from_rows(&[vec![100.0, 5.0], vec![300.0, 5.0], vec![200.0, 5.0]]).unwrap();
        let s = MinMaxScaler::fit(&m).unwrap();
        let t = s.transform_matrix(&m).unwrap();
        assert_eq!(t.row(0), &[0.0, 0.0]);
        assert_eq!(t.row(1), &[1.0, 0.0]);
        assert_eq!(t.row(2), &[0.5, 0.0]);
        // refitting on scaled data is the identity
        let again = MinMaxScaler::fit(&t).unwrap();
        assert_eq!(again.transform_matrix(&t).unwrap(), t);
    }

    #[test]
    fn identity_scaler() {
        let s = MinMaxScaler::identity(2);
        assert_eq!(s.transform(&[3.5, -1.0]).unwrap(), vec![3.5, -1.0]);
        assert!(s.transform(&[1.0]).is_err());
    }
}
