//! Binary classifiers built from scratch (k-nearest neighbours over a
//! KD-tree, Gaussian naive Bayes, L2 logistic regression and a one-hidden-layer
//! perceptron) together with the evaluation used to compare them: a seeded
//! 70/30 split, ROC curves, AUC, accuracy and F1.
//!
//! The `attrition` binary wraps everything in a command-line pipeline; see
//! [`cli`].

pub mod cli;
pub mod dataset;
pub mod distance;
pub mod error;
pub mod knn;
pub mod logistic;
pub mod metrics;
pub mod mlp;
pub mod model;
pub mod naive_bayes;
pub mod pipeline;
pub mod scaling;

pub use dataset::{EncodedDataset, Matrix, Schema, SplitResult};
pub use distance::Metric;
pub use error::{Error, Result};
pub use knn::{KnnConfig, KnnModel, NeighborIndex, Weighting};
pub use logistic::{LogisticConfig, LogisticModel};
pub use metrics::{ConfusionMatrix, EvaluationReport, RocCurve};
pub use mlp::{MlpConfig, MlpModel};
pub use model::{Classifier, ModelKind, TrainedModel};
pub use naive_bayes::GaussianNbModel;
