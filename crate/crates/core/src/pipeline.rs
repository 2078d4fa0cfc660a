//! Train / evaluate / compare on an encoded dataset.

use serde::Serialize;

use crate::dataset::{self, EncodedDataset, SplitResult};
use crate::error::{Error, Result};
use crate::knn::{KnnConfig, KnnModel};
use crate::logistic::{LogisticConfig, LogisticModel};
use crate::metrics::{self, EvaluationReport, RocCurve};
use crate::mlp::{MlpConfig, MlpModel};
use crate::model::{Classifier, ModelKind, SplitInfo, TrainedModel};
use crate::naive_bayes::{GaussianNbModel, DEFAULT_VAR_SMOOTHING};
use crate::scaling::MinMaxScaler;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_FRACTION: f64 = 0.7;

/// Offset added to the split seed to seed a model's own random stream.
/// Only the perceptron draws random numbers.
pub fn model_seed(kind: ModelKind, split_seed: u64) -> u64 {
    let offset = match kind {
        ModelKind::Knn => 0,
        ModelKind::Gnb => 1,
        ModelKind::Logreg => 2,
        ModelKind::Mlp => 3,
    };
    split_seed.wrapping_add(offset)
}

/// Hyperparameters for every model kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub knn: KnnConfig,
    pub var_smoothing: f64,
    pub logistic: LogisticConfig,
    pub mlp: MlpConfig,
    /// Min-max scale inputs for KNN and naive Bayes (the other two always scale).
    pub scale: bool,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            knn: KnnConfig::default(),
            var_smoothing: DEFAULT_VAR_SMOOTHING,
            logistic: LogisticConfig::default(),
            mlp: MlpConfig::default(),
            scale: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub kind: ModelKind,
    pub n_train: usize,
    pub n_positive: usize,
    /// Gradient-descent iterations (logistic) or epochs (perceptron).
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
    pub final_loss: Option<f64>,
}

pub fn train(kind: ModelKind, split: &SplitResult, opts: &TrainOptions) -> Result<(TrainedModel, TrainSummary)> {
    let train = &split.train;
    if train.is_empty() {
        return Err(Error::Empty("training partition"));
    }
    let mut summary = TrainSummary {
        kind,
        n_train: train.len(),
        n_positive: train.class_counts().0,
        iterations: None,
        converged: None,
        final_loss: None,
    };

    let use_input_scaler = opts.scale && matches!(kind, ModelKind::Knn | ModelKind::Gnb);
    let input_scaler = if use_input_scaler {
        Some(MinMaxScaler::fit(&train.features)?)
    } else {
        None
    };
    let scaled;
    let fit_data: &EncodedDataset = match &input_scaler {
        Some(s) => {
            scaled = EncodedDataset {
                features: s.transform_matrix(&train.features)?,
                ..train.clone()
            };
            &scaled
        }
        None => train,
    };

    let classifier = match kind {
        ModelKind::Knn => Classifier::Knn(KnnModel::fit(fit_data, opts.knn)?),
        ModelKind::Gnb => Classifier::Gnb(GaussianNbModel::fit(fit_data, opts.var_smoothing)?),
        ModelKind::Logreg => {
            let (model, report) = LogisticModel::fit_with_report(fit_data, &opts.logistic)?;
            summary.iterations = Some(report.iterations);
            summary.converged = Some(report.converged);
            summary.final_loss = Some(report.final_loss);
            Classifier::Logreg(model, opts.logistic)
        }
        ModelKind::Mlp => {
            let config = MlpConfig {
                seed: model_seed(kind, split.seed),
                ..opts.mlp
            };
            let (model, report) = MlpModel::fit_with_report(fit_data, &config)?;
            summary.iterations = Some(report.epoch_losses.len());
            summary.final_loss = report.epoch_losses.last().copied();
            Classifier::Mlp(model, config)
        }
    };

    let model = TrainedModel {
        classifier,
        input_scaler,
        schema: train.schema.clone(),
        encoders: train.encoders.clone(),
        split: SplitInfo {
            seed: split.seed,
            fraction: split.fraction,
            partition_checksum: split.checksum(),
        },
    };
    Ok((model, summary))
}

/// Re-derives the split recorded in a model and checks it against the data.
pub fn resplit(model: &TrainedModel, ds: &EncodedDataset, seed: u64, fraction: f64) -> Result<SplitResult> {
    let split = dataset::split(ds, fraction, seed)?;
    if split.checksum() != model.split.partition_checksum {
        return Err(Error::PartitionMismatch);
    }
    Ok(split)
}

pub fn evaluate(model: &TrainedModel, data: &EncodedDataset, seed: u64, fraction: f64) -> Result<EvaluationReport> {
    if data.n_features() != model.classifier.n_features() {
        return Err(Error::DimensionMismatch {
            expected: model.classifier.n_features(),
            found: data.n_features(),
        });
    }
    let (scores, predictions) = model.score_rows(&data.features)?;
    EvaluationReport::from_predictions(model.kind().as_str(), seed, fraction, &data.labels, &scores, &predictions)
}

pub fn roc(model: &TrainedModel, data: &EncodedDataset) -> Result<RocCurve> {
    let (scores, _) = model.score_rows(&data.features)?;
    metrics::roc_curve(&data.labels, &scores)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub model: ModelKind,
    pub auc: f64,
    pub accuracy: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedComparison {
    pub seed: u64,
    pub rows: Vec<ComparisonRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub fraction: f64,
    pub per_seed: Vec<SeedComparison>,
    pub mean: Vec<ComparisonRow>,
}

/// Trains and evaluates all four models on identical splits, one per seed.
pub fn compare(ds: &EncodedDataset, seeds: &[u64], fraction: f64, opts: &TrainOptions) -> Result<Comparison> {
    if seeds.is_empty() {
        return Err(Error::InvalidParameter("no seeds given".into()));
    }
    let mut per_seed = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let split = dataset::split(ds, fraction, seed)?;
        let mut rows = Vec::with_capacity(4);
        for kind in ModelKind::ALL {
            let (model, summary) = train(kind, &split, opts)?;
            log::info!("seed {seed}: trained {kind} ({summary:?})");
            let report = evaluate(&model, &split.test, seed, fraction)?;
            rows.push(ComparisonRow {
                model: kind,
                auc: report.auc,
                accuracy: report.accuracy,
                f1: report.f1,
            });
        }
        per_seed.push(SeedComparison { seed, rows });
    }
    let n = per_seed.len() as f64;
    let mean = ModelKind::ALL
        .iter()
        .enumerate()
        .map(|(i, &kind)| {
            let avg = |f: fn(&ComparisonRow) -> f64| per_seed.iter().map(|s| f(&s.rows[i])).sum::<f64>() / n;
            ComparisonRow {
                model: kind,
                auc: avg(|r| r.auc),
                accuracy: avg(|r| r.accuracy),
                f1: avg(|r| r.f1),
            }
        })
        .collect();
    Ok(Comparison {
        fraction,
        per_seed,
        mean,
    })
}

impl Comparison {
    /// Fixed-width table: per-seed rows, then the mean when there are several seeds.
    pub fn to_table(&self) -> String {
        let mut out = format!("{:<6}  {:<20}  {:>7}  {:>8}  {:>7}\n", "seed", "model", "AUC", "accuracy", "F1");
        let mut push = |seed: &str, r: &ComparisonRow| {
            out.push_str(&format!(
                "{:<6}  {:<20}  {:>7.4}  {:>8.4}  {:>7.4}\n",
                seed,
                r.model.display_name(),
                r.auc,
                r.accuracy,
                r.f1
            ));
        };
        for s in &self.per_seed {
            for r in &s.rows {
                push(&s.seed.to_string(), r);
            }
        }
        if self.per_seed.len() > 1 {
            for r in &self.mean {
                push("mean", r);
            }
        }
        out
    }
}
