//! The versioned model file.
//!
//! ```json
//! {"format_version": 1, "kind": "gbm", "class_names": [...],
//!  "vocab_fingerprint": "…16 hex digits…", "n_features": 130,
//!  "symptoms": [...], "payload": {...}}
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{GbmModel, KnnModel, NbModel, RfModel, SvmModel};
use crate::clustering::KMeansModel;
use crate::dataset::{LabeledDataset, SymptomVector, SymptomVocabulary};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Gbm,
    Svm,
    Knn,
    Nb,
    Rf,
    Kmeans,
}

impl ModelKind {
    pub const CLASSIFIERS: [ModelKind; 5] = [
        ModelKind::Gbm,
        ModelKind::Nb,
        ModelKind::Svm,
        ModelKind::Rf,
        ModelKind::Knn,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Gbm => "gbm",
            ModelKind::Svm => "svm",
            ModelKind::Knn => "knn",
            ModelKind::Nb => "nb",
            ModelKind::Rf => "rf",
            ModelKind::Kmeans => "kmeans",
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
        match s.trim().to_ascii_lowercase().as_str() {
            "gbm" => Ok(ModelKind::Gbm),
            "svm" => Ok(ModelKind::Svm),
            "knn" => Ok(ModelKind::Knn),
            "nb" => Ok(ModelKind::Nb),
            "rf" => Ok(ModelKind::Rf),
            "kmeans" => Ok(ModelKind::Kmeans),
            other => Err(Error::InvalidArgument(format!(
                "unknown model kind '{other}' (expected gbm, svm, knn, nb, rf or kmeans)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ModelPayload {
    Gbm(GbmModel),
    Svm(SvmModel),
    Knn(KnnModel),
    Nb(NbModel),
    Rf(RfModel),
    Kmeans(KMeansModel),
}

impl ModelPayload {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelPayload::Gbm(_) => ModelKind::Gbm,
            ModelPayload::Svm(_) => ModelKind::Svm,
            ModelPayload::Knn(_) => ModelKind::Knn,
            ModelPayload::Nb(_) => ModelKind::Nb,
            ModelPayload::Rf(_) => ModelKind::Rf,
            ModelPayload::Kmeans(_) => ModelKind::Kmeans,
        }
    }

    fn class_count(&self) -> Option<usize> {
        match self {
            ModelPayload::Gbm(m) => Some(m.initial_scores.len()),
            ModelPayload::Svm(m) => Some(m.bias.len()),
            ModelPayload::Knn(m) => Some(m.n_classes),
            ModelPayload::Nb(m) => Some(m.log_prior.len()),
            ModelPayload::Rf(m) => Some(m.n_classes),
            ModelPayload::Kmeans(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ModelFile", try_from = "ModelFile")]
pub struct TrainedModel {
    pub class_names: Vec<String>,
    pub vocab_fingerprint: String,
    pub n_features: usize,
    /// Vocabulary names in column order, so a served model can list and
    /// encode symptoms without the training data.
    pub symptoms: Vec<String>,
    pub payload: ModelPayload,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format_version: u32,
    kind: ModelKind,
    class_names: Vec<String>,
    vocab_fingerprint: String,
    n_features: usize,
    symptoms: Vec<String>,
    payload: serde_json::Value,
}

impl From<TrainedModel> for ModelFile {
    fn from(m: TrainedModel) -> Self {
        ModelFile {
            format_version: FORMAT_VERSION,
            kind: m.payload.kind(),
            class_names: m.class_names,
            vocab_fingerprint: m.vocab_fingerprint,
            n_features: m.n_features,
            symptoms: m.symptoms,
            payload: serde_json::to_value(&m.payload).expect("payload serialises"),
        }
    }
}

impl TryFrom<ModelFile> for TrainedModel {
    type Error = Error;

    fn try_from(f: ModelFile) -> Result<Self> {
        if f.format_version != FORMAT_VERSION {
            return Err(Error::Model(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                f.format_version
            )));
        }
        let ctx = format!("{} payload", f.kind);
        let payload = match f.kind {
            ModelKind::Gbm => ModelPayload::Gbm(from_value(f.payload, &ctx)?),
            ModelKind::Svm => ModelPayload::Svm(from_value(f.payload, &ctx)?),
            ModelKind::Knn => ModelPayload::Knn(from_value(f.payload, &ctx)?),
            ModelKind::Nb => ModelPayload::Nb(from_value(f.payload, &ctx)?),
            ModelKind::Rf => ModelPayload::Rf(from_value(f.payload, &ctx)?),
            ModelKind::Kmeans => ModelPayload::Kmeans(from_value(f.payload, &ctx)?),
        };
        let model = TrainedModel::new(f.class_names, f.vocab_fingerprint, f.n_features, payload)?;
        model.with_symptoms(f.symptoms)
    }
}

fn from_value<T: serde::de::DeserializeOwned>(v: serde_json::Value, ctx: &str) -> Result<T> {
    serde_json::from_value(v).map_err(|e| Error::json(ctx, e))
}

impl fmt::Display for TrainedModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} model: {} classes, {} features",
            self.kind(),
            self.class_names.len(),
            self.n_features
        )
    }
}

impl TrainedModel {
    pub fn new(
        class_names: Vec<String>,
        vocab_fingerprint: String,
        n_features: usize,
        payload: ModelPayload,
    ) -> Result<Self> {
        if let Some(count) = payload.class_count() {
            if count != class_names.len() {
                return Err(Error::Model(format!(
                    "payload has {count} classes but {} class names",
                    class_names.len()
                )));
            }
        }
        Ok(Self {
            class_names,
            vocab_fingerprint,
            n_features,
            symptoms: Vec::new(),
            payload,
        })
    }

    pub fn for_dataset(ds: &LabeledDataset, payload: ModelPayload) -> Result<Self> {
        let model = Self::new(
            ds.class_names().to_vec(),
            ds.vocabulary().fingerprint(),
            ds.n_features(),
            payload,
        )?;
        model.with_symptoms(ds.vocabulary().names().to_vec())
    }

    /// Attaches vocabulary names; they must reproduce the stored fingerprint.
    /// An empty list leaves the model without names.
    pub fn with_symptoms(mut self, symptoms: Vec<String>) -> Result<Self> {
        if !symptoms.is_empty() {
            let vocab = SymptomVocabulary::new(&symptoms)?;
            self.check_vocabulary(&vocab)?;
        }
        self.symptoms = symptoms;
        Ok(self)
    }

    /// The training vocabulary, when the model carries its names.
    pub fn vocabulary(&self) -> Result<SymptomVocabulary> {
        if self.symptoms.is_empty() {
            return Err(Error::Model("model file carries no symptom names".into()));
        }
        SymptomVocabulary::new(&self.symptoms)
    }

    pub fn kind(&self) -> ModelKind {
        self.payload.kind()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn check_vocabulary(&self, vocabulary: &SymptomVocabulary) -> Result<()> {
        let found = vocabulary.fingerprint();
        if found != self.vocab_fingerprint || vocabulary.len() != self.n_features {
            return Err(Error::VocabularyMismatch {
                expected: self.vocab_fingerprint.clone(),
                found,
            });
        }
        Ok(())
    }

    /// Full class distribution for `x`.
    pub fn class_probabilities(&self, x: &SymptomVector) -> Result<Vec<f64>> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                found: x.len(),
            });
        }
        Ok(match &self.payload {
            ModelPayload::Gbm(m) => m.predict_proba(x),
            ModelPayload::Svm(m) => m.predict_proba(x),
            ModelPayload::Knn(m) => m.predict_proba(x),
            ModelPayload::Nb(m) => m.predict_proba(x),
            ModelPayload::Rf(m) => m.predict_proba(x),
            ModelPayload::Kmeans(_) => {
                return Err(Error::InvalidArgument(
                    "k-means models assign cohorts, not disease probabilities".into(),
                ))
            }
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::json("model file", e))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = self.to_json();
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Json { source, .. } => Error::json(path.display().to_string(), source),
            other => other,
        })
    }
}
