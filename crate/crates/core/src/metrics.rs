//! Confusion counts, accuracy, F1, ROC curve and AUC for binary labels.
//!
//! Label 1 is the positive class. Any `0/0` inside precision, recall or F1
//! evaluates to 0. The ROC sweep groups tied scores into a single step, so
//! the trapezoid area equals the pairwise ranking probability with ties
//! counted as one half.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.total())
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn check_lengths(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::LengthMismatch { left, right });
    }
    if left == 0 {
        return Err(Error::Empty("no samples to evaluate"));
    }
    Ok(())
}

pub fn confusion(labels: &[u8], predictions: &[u8]) -> Result<ConfusionMatrix> {
    check_lengths(labels.len(), predictions.len())?;
    let mut cm = ConfusionMatrix::default();
    for (i, (&y, &p)) in labels.iter().zip(predictions).enumerate() {
        match (y, p) {
            (1, 1) => cm.tp += 1,
            (0, 1) => cm.fp += 1,
            (1, 0) => cm.fn_ += 1,
            (0, 0) => cm.tn += 1,
            _ => {
                return Err(Error::BadLabel {
                    row: i + 1,
                    value: format!("{y}/{p}"),
                })
            }
        }
    }
    Ok(cm)
}

pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    if cm.total() == 0 {
        return Err(Error::Empty("confusion matrix"));
    }
    Ok(cm.accuracy())
}

pub fn f1(cm: &ConfusionMatrix) -> Result<f64> {
    if cm.total() == 0 {
        return Err(Error::Empty("confusion matrix"));
    }
    Ok(cm.f1())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

/// ROC points from `(0, 0)` at threshold `+∞` to `(1, 1)`, one per distinct score.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
}

fn class_totals(labels: &[u8]) -> Result<(usize, usize)> {
    if let Some(i) = labels.iter().position(|&y| y > 1) {
        return Err(Error::BadLabel {
            row: i + 1,
            value: labels[i].to_string(),
        });
    }
    let pos = labels.iter().filter(|&&y| y == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 {
        return Err(Error::MissingClass(1));
    }
    if neg == 0 {
        return Err(Error::MissingClass(0));
    }
    Ok((pos, neg))
}

fn check_scores(scores: &[f64]) -> Result<()> {
    match scores.iter().position(|s| s.is_nan()) {
        Some(i) => Err(Error::NonFiniteScore(i)),
        None => Ok(()),
    }
}

pub fn roc_curve(labels: &[u8], scores: &[f64]) -> Result<RocCurve> {
    check_lengths(labels.len(), scores.len())?;
    check_scores(scores)?;
    let (pos, neg) = class_totals(labels)?;

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        while i < order.len() && scores[order[i]] == threshold {
            if labels[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            threshold,
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
        });
    }
    Ok(RocCurve { points })
}

/// Trapezoidal area under the curve.
pub fn auc_trapezoid(curve: &RocCurve) -> f64 {
    curve
        .points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
        .sum()
}

/// Fraction of (positive, negative) pairs ranked correctly, ties worth ½.
pub fn auc_pair_count(labels: &[u8], scores: &[f64]) -> Result<f64> {
    check_lengths(labels.len(), scores.len())?;
    check_scores(scores)?;
    let (pos, neg) = class_totals(labels)?;
    let mut wins = 0.0;
    for (i, &yi) in labels.iter().enumerate() {
        if yi != 1 {
            continue;
        }
        for (j, &yj) in labels.iter().enumerate() {
            if yj != 0 {
                continue;
            }
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                wins += 0.5;
            }
        }
    }
    Ok(wins / (pos * neg) as f64)
}

/// Held-out statistics for one model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub model: String,
    pub seed: u64,
    pub fraction: f64,
    pub n_samples: usize,
    pub auc: f64,
    pub accuracy: f64,
    pub f1: f64,
    pub confusion: ConfusionMatrix,
}

impl EvaluationReport {
    pub fn from_predictions(
        model: impl Into<String>,
        seed: u64,
        fraction: f64,
        labels: &[u8],
        scores: &[f64],
        predictions: &[u8],
    ) -> Result<Self> {
        check_lengths(labels.len(), scores.len())?;
        let cm = confusion(labels, predictions)?;
        let auc = auc_trapezoid(&roc_curve(labels, scores)?);
        Ok(EvaluationReport {
            model: model.into(),
            seed,
            fraction,
            n_samples: labels.len(),
            auc,
            accuracy: cm.accuracy(),
            f1: cm.f1(),
            confusion: cm,
        })
    }
}
