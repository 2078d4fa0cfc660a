//! A fitted classifier of any kind plus what is needed to reuse it on new
//! CSV data, and its on-disk form.
//!
//! Model files are pretty-printed JSON with a `format_version` key. Floats
//! are written in shortest round-trip form and parsed exactly, so a
//! save → load cycle reproduces every parameter bit for bit and a second
//! save produces identical bytes. KNN files carry the training rows; the
//! KD-tree is rebuilt deterministically on load.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{Encoders, Matrix, Schema};
use crate::error::{Error, Result};
use crate::knn::{KnnConfig, KnnModel};
use crate::logistic::{LogisticConfig, LogisticModel};
use crate::mlp::{MlpConfig, MlpModel};
use crate::naive_bayes::GaussianNbModel;
use crate::scaling::MinMaxScaler;

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Knn,
    Gnb,
    Logreg,
    Mlp,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Knn,
        ModelKind::Gnb,
        ModelKind::Logreg,
        ModelKind::Mlp,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Knn => "knn",
            ModelKind::Gnb => "gnb",
            ModelKind::Logreg => "logreg",
            ModelKind::Mlp => "mlp",
        }
    }

    /// Name used in comparison tables.
    pub fn display_name(&self) -> &'static str {
        match self {
            ModelKind::Knn => "KNN",
            ModelKind::Gnb => "Gaussian NB",
            ModelKind::Logreg => "Logistic Regression",
            ModelKind::Mlp => "MLP",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown model kind `{s}`")))
    }
}

#[derive(Debug, Clone)]
pub enum Classifier {
    Knn(KnnModel),
    Gnb(GaussianNbModel),
    Logreg(LogisticModel, LogisticConfig),
    Mlp(MlpModel, MlpConfig),
}

impl Classifier {
    pub fn kind(&self) -> ModelKind {
        match self {
            Classifier::Knn(_) => ModelKind::Knn,
            Classifier::Gnb(_) => ModelKind::Gnb,
            Classifier::Logreg(..) => ModelKind::Logreg,
            Classifier::Mlp(..) => ModelKind::Mlp,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            Classifier::Knn(m) => m.n_features(),
            Classifier::Gnb(m) => m.n_features(),
            Classifier::Logreg(m, _) => m.n_features(),
            Classifier::Mlp(m, _) => m.n_features(),
        }
    }

    /// Probability-like score for class 1.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        match self {
            Classifier::Knn(m) => m.score(x),
            Classifier::Gnb(m) => m.predict_proba(x),
            Classifier::Logreg(m, _) => m.predict_proba(x),
            Classifier::Mlp(m, _) => m.forward(x),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<u8> {
        match self {
            Classifier::Knn(m) => m.predict(x),
            Classifier::Gnb(m) => m.predict(x),
            Classifier::Logreg(m, _) => m.predict(x),
            Classifier::Mlp(m, _) => m.predict(x),
        }
    }
}

/// Split parameters recorded at training time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitInfo {
    pub seed: u64,
    pub fraction: f64,
    pub partition_checksum: String,
}

#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub classifier: Classifier,
    /// Optional min-max map applied before KNN or naive Bayes.
    pub input_scaler: Option<MinMaxScaler>,
    pub schema: Schema,
    pub encoders: Encoders,
    pub split: SplitInfo,
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        self.classifier.kind()
    }

    fn prepare<'a>(&self, x: &'a [f64], buf: &'a mut Vec<f64>) -> Result<&'a [f64]> {
        match &self.input_scaler {
            Some(s) => {
                *buf = s.transform(x)?;
                Ok(buf.as_slice())
            }
            None => Ok(x),
        }
    }

    pub fn score(&self, x: &[f64]) -> Result<f64> {
        let mut buf = Vec::new();
        self.classifier.score(self.prepare(x, &mut buf)?)
    }

    pub fn predict(&self, x: &[f64]) -> Result<u8> {
        let mut buf = Vec::new();
        self.classifier.predict(self.prepare(x, &mut buf)?)
    }

    /// Scores and hard labels for every row.
    pub fn score_rows(&self, features: &Matrix) -> Result<(Vec<f64>, Vec<u8>)> {
        let mut scores = Vec::with_capacity(features.n_rows());
        let mut labels = Vec::with_capacity(features.n_rows());
        let mut buf = Vec::new();
        for row in features.iter_rows() {
            let x = self.prepare(row, &mut buf)?;
            scores.push(self.classifier.score(x)?);
            labels.push(self.classifier.predict(x)?);
        }
        Ok((scores, labels))
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let model = match &self.classifier {
            Classifier::Knn(m) => StoredModel::Knn {
                config: *m.config(),
                features: m.features().clone(),
                labels: m.labels().to_vec(),
            },
            Classifier::Gnb(m) => StoredModel::Gnb { model: m.clone() },
            Classifier::Logreg(m, c) => StoredModel::Logreg {
                config: *c,
                model: m.clone(),
            },
            Classifier::Mlp(m, c) => StoredModel::Mlp {
                config: *c,
                model: m.clone(),
            },
        };
        let file = ModelFile {
            format_version: FORMAT_VERSION,
            model_kind: self.kind(),
            schema: self.schema.clone(),
            encoders: self.encoders.clone(),
            split: self.split.clone(),
            input_scaler: self.input_scaler.clone(),
            model,
        };
        let mut bytes = serde_json::to_vec_pretty(&file)
            .map_err(|e| Error::ModelFormat(e.to_string()))?;
        bytes.push(b'\n');
        Ok(bytes)
    }

    /// Parses a model file, optionally insisting on a model kind.
    pub fn from_bytes(bytes: &[u8], expected: Option<ModelKind>) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_slice(bytes).map_err(|e| Error::ModelFormat(e.to_string()))?;
        let version = value
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| Error::ModelFormat("missing format_version".into()))?;
        if version != FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                found: version,
                expected: FORMAT_VERSION,
            });
        }
        let file: ModelFile =
            serde_json::from_value(value).map_err(|e| Error::ModelFormat(e.to_string()))?;
        if let Some(expected) = expected {
            if expected != file.model_kind {
                return Err(Error::KindMismatch {
                    found: file.model_kind.to_string(),
                    expected: expected.to_string(),
                });
            }
        }
        let classifier = match file.model {
            StoredModel::Knn {
                config,
                features,
                labels,
            } => Classifier::Knn(KnnModel::from_parts(config, features, labels)?),
            StoredModel::Gnb { model } => Classifier::Gnb(model),
            StoredModel::Logreg { config, model } => Classifier::Logreg(model, config),
            StoredModel::Mlp { config, model } => Classifier::Mlp(model, config),
        };
        if classifier.kind() != file.model_kind {
            return Err(Error::ModelFormat(format!(
                "model_kind `{}` does not match the stored parameters (`{}`)",
                file.model_kind,
                classifier.kind()
            )));
        }
        if classifier.n_features() != file.schema.n_features() {
            return Err(Error::ModelFormat(
                "parameter dimension does not match the schema".into(),
            ));
        }
        Ok(TrainedModel {
            classifier,
            input_scaler: file.input_scaler,
            schema: file.schema,
            encoders: file.encoders,
            split: file.split,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u64,
    model_kind: ModelKind,
    schema: Schema,
    encoders: Encoders,
    split: SplitInfo,
    input_scaler: Option<MinMaxScaler>,
    model: StoredModel,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum StoredModel {
    Knn {
        config: KnnConfig,
        features: Matrix,
        labels: Vec<u8>,
    },
    Gnb {
        model: GaussianNbModel,
    },
    Logreg {
        config: LogisticConfig,
        model: LogisticModel,
    },
    Mlp {
        config: MlpConfig,
        model: MlpModel,
    },
}
