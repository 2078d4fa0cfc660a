//! k-nearest-neighbour classifier on top of the KD-tree index.

mod kdtree;

pub use kdtree::{NeighborIndex, Neighbor, DEFAULT_LEAF_CAPACITY};

use serde::{Deserialize, Serialize};

use crate::dataset::{EncodedDataset, Matrix};
use crate::distance::Metric;
use crate::error::{Error, Result};

pub const DEFAULT_K: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    #[default]
    Uniform,
    InverseDistance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnnConfig {
    pub k: usize,
    pub metric: Metric,
    pub weighting: Weighting,
    pub leaf_capacity: usize,
}

impl Default for KnnConfig {
    fn default() -> Self {
        KnnConfig {
            k: DEFAULT_K,
            metric: Metric::Manhattan,
            weighting: Weighting::Uniform,
            leaf_capacity: DEFAULT_LEAF_CAPACITY,
        }
    }
}

/// Aggregated neighbour vote for one query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vote {
    /// Weighted fraction of positive neighbours.
    pub score: f64,
    pub positive_distance: f64,
    pub negative_distance: f64,
}

impl Vote {
    /// Tallies `(label, distance)` pairs. With inverse-distance weights, any
    /// zero-distance neighbour takes over: the score is the positive fraction
    /// among the zero-distance neighbours only.
    pub fn tally(neighbors: &[(u8, f64)], weighting: Weighting) -> Vote {
        let positive_distance = neighbors
            .iter()
            .filter(|n| n.0 == 1)
            .map(|n| n.1)
            .sum();
        let negative_distance = neighbors
            .iter()
            .filter(|n| n.0 == 0)
            .map(|n| n.1)
            .sum();
        let fraction = |it: &mut dyn Iterator<Item = &(u8, f64)>| {
            let (pos, all) = it.fold((0usize, 0usize), |(p, a), n| (p + n.0 as usize, a + 1));
            pos as f64 / all as f64
        };
        let score = match weighting {
            Weighting::Uniform => fraction(&mut neighbors.iter()),
            Weighting::InverseDistance if neighbors.iter().any(|n| n.1 == 0.0) => {
                fraction(&mut neighbors.iter().filter(|n| n.1 == 0.0))
            }
            Weighting::InverseDistance => {
                let (pos, all) = neighbors.iter().fold((0.0, 0.0), |(p, a), n| {
                    let w = 1.0 / n.1;
                    (if n.0 == 1 { p + w } else { p }, a + w)
                });
                pos / all
            }
        };
        Vote {
            score,
            positive_distance,
            negative_distance,
        }
    }

    /// Majority label; an exact 0.5 goes to the class whose neighbours are
    /// closer in total, then to 0.
    pub fn label(&self) -> u8 {
        if self.score > 0.5 {
            1
        } else if self.score < 0.5 {
            0
        } else if self.positive_distance < self.negative_distance {
            1
        } else {
            0
        }
    }
}

#[derive(Debug, Clone)]
pub struct KnnModel {
    config: KnnConfig,
    features: Matrix,
    labels: Vec<u8>,
    index: NeighborIndex,
}

impl KnnModel {
    pub fn fit(train: &EncodedDataset, config: KnnConfig) -> Result<Self> {
        Self::from_parts(config, train.features.clone(), train.labels.clone())
    }

    /// Rebuilds a model from stored training data.
    pub fn from_parts(config: KnnConfig, features: Matrix, labels: Vec<u8>) -> Result<Self> {
        if features.n_rows() == 0 {
            return Err(Error::Empty("knn training set"));
        }
        if labels.len() != features.n_rows() {
            return Err(Error::LengthMismatch {
                left: features.n_rows(),
                right: labels.len(),
            });
        }
        if config.k == 0 || config.k > features.n_rows() {
            return Err(Error::InvalidParameter(format!(
                "k={} must be in 1..={} (training rows)",
                config.k,
                features.n_rows()
            )));
        }
        if let Metric::Minkowski { p } = config.metric {
            Metric::minkowski(p)?;
        }
        let index = NeighborIndex::build(&features, config.leaf_capacity)?;
        Ok(KnnModel {
            config,
            features,
            labels,
            index,
        })
    }

    pub fn config(&self) -> &KnnConfig {
        &self.config
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn index(&self) -> &NeighborIndex {
        &self.index
    }

    pub fn n_features(&self) -> usize {
        self.features.n_cols()
    }

    pub fn neighbors(&self, x: &[f64]) -> Result<Vec<Neighbor>> {
        self.index
            .query(&self.features, x, self.config.k, &self.config.metric)
    }

    pub fn vote(&self, x: &[f64]) -> Result<Vote> {
        let labelled: Vec<(u8, f64)> = self
            .neighbors(x)?
            .iter()
            .map(|n| (self.labels[n.index], n.distance))
            .collect();
        Ok(Vote::tally(&labelled, self.config.weighting))
    }

    pub fn score(&self, x: &[f64]) -> Result<f64> {
        Ok(self.vote(x)?.score)
    }

    pub fn predict(&self, x: &[f64]) -> Result<u8> {
        Ok(self.vote(x)?.label())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dataset(rows: &[Vec<f64>], labels: &[u8]) -> EncodedDataset {
        EncodedDataset::from_rows(rows, labels).unwrap()
    }

    #[test]
    fn k_bounds_at_fit() {
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64]).collect();
        let labels = [0, 1, 0, 1, 0, 1];
        assert!(KnnModel::fit(&dataset(&rows, &labels), KnnConfig::default()).is_ok());
        let five = dataset(&rows[..5], &labels[..5]);
        assert!(KnnModel::fit(&five, KnnConfig::default()).is_err());
        let zero = KnnConfig {
            k: 0,
            ..KnnConfig::default()
        };
        assert!(KnnModel::fit(&dataset(&rows, &labels), zero).is_err());
    }

    #[test]
    fn uniform_scores() {
        let all_pos: Vec<(u8, f64)> = (0..6).map(|i| (1, i as f64)).collect();
        assert_eq!(Vote::tally(&all_pos, Weighting::Uniform).score, 1.0);
        let four: Vec<(u8, f64)> = [1, 1, 1, 1, 0, 0].iter().map(|&y| (y, 1.0)).collect();
        let v = Vote::tally(&four, Weighting::Uniform);
        assert!((v.score - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(v.label(), 1);
    }

    #[test]
    fn inverse_distance_score() {
        let n = [(1, 1.0), (0, 2.0), (0, 4.0)];
        let v = Vote::tally(&n, Weighting::InverseDistance);
        assert!((v.score - 4.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn inverse_distance_with_exact_matches() {
        let n = [(1, 0.0), (0, 0.0), (0, 0.0), (1, 0.5)];
        let v = Vote::tally(&n, Weighting::InverseDistance);
        assert!((v.score - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn tie_goes_to_closer_class_then_zero() {
        let n = [(1, 1.0), (1, 1.0), (1, 1.0), (0, 2.0), (0, 2.0), (0, 2.0)];
        let v = Vote::tally(&n, Weighting::Uniform);
        assert_eq!(v.score, 0.5);
        assert_eq!(v.label(), 1);
        let flipped = [(0, 1.0), (0, 1.0), (0, 1.0), (1, 2.0), (1, 2.0), (1, 2.0)];
        assert_eq!(Vote::tally(&flipped, Weighting::Uniform).label(), 0);
        let even = [(0, 1.0), (1, 1.0)];
        assert_eq!(Vote::tally(&even, Weighting::Uniform).label(), 0);
    }

    #[test]
    fn k1_reproduces_training_labels() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows: Vec<Vec<f64>> = (0..300)
            .map(|_| (0..3).map(|_| rng.gen_range(-5.0..5.0)).collect())
            .collect();
        let labels: Vec<u8> = (0..300).map(|_| rng.gen_range(0..2)).collect();
        let cfg = KnnConfig {
            k: 1,
            ..KnnConfig::default()
        };
        let model = KnnModel::fit(&dataset(&rows, &labels), cfg).unwrap();
        for (r, &y) in rows.iter().zip(&labels) {
            assert_eq!(model.predict(r).unwrap(), y);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let rows = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        let cfg = KnnConfig {
            k: 1,
            ..KnnConfig::default()
        };
        let model = KnnModel::fit(&dataset(&rows, &[0, 1]), cfg).unwrap();
        assert!(model.score(&[0.0]).is_err());
    }

    #[test]
    fn translation_leaves_scores_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rows: Vec<Vec<f64>> = (0..200)
            .map(|_| (0..4).map(|_| rng.gen_range(0..10) as f64).collect())
            .collect();
        let labels: Vec<u8> = (0..200).map(|_| rng.gen_range(0..2)).collect();
        let shift = [100.0, -50.0, 25.0, 8.0];
        let moved: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| r.iter().zip(&shift).map(|(a, b)| a + b).collect())
            .collect();
        for weighting in [Weighting::Uniform, Weighting::InverseDistance] {
            let cfg = KnnConfig {
                weighting,
                ..KnnConfig::default()
            };
            let a = KnnModel::fit(&dataset(&rows, &labels), cfg).unwrap();
            let b = KnnModel::fit(&dataset(&moved, &labels), cfg).unwrap();
            for _ in 0..100 {
                let q: Vec<f64> = (0..4).map(|_| rng.gen_range(0..10) as f64).collect();
                let qm: Vec<f64> = q.iter().zip(&shift).map(|(a, b)| a + b).collect();
                let (sa, sb) = (a.score(&q).unwrap(), b.score(&qm).unwrap());
                assert!((sa - sb).abs() < 1e-12);
                assert!((0.0..=1.0).contains(&sa));
                let label = a.predict(&q).unwrap();
                assert!(label == 0 || sa >= 0.5);
            }
        }
    }
}
