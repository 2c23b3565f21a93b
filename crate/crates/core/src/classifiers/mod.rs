//! Supervised disease classifiers behind a single train/predict contract.
//!
//! Every trainer returns a [`TrainedModel`], a serialisable tagged union that
//! records the class names and a fingerprint of the training vocabulary.
//! [`predict`] turns a model and a symptom vector into a ranked
//! [`Prediction`].

mod gbm;
mod knn;
mod model;
mod nb;
pub mod params;
mod rf;
mod svm;
pub mod tree;

use serde::{Deserialize, Serialize};

use crate::dataset::{LabeledDataset, SymptomVector};
use crate::error::{Error, Result};

pub use gbm::{
    log_loss, log_loss_gradient, train_gbm, train_gbm_traced, GbmFit, GbmModel,
};
pub use knn::{train_knn, KnnModel, KnnParams, DEFAULT_K};
pub use model::{ModelKind, ModelPayload, TrainedModel, FORMAT_VERSION};
pub use nb::{train_nb, NbModel, NbParams};
pub use params::{validate_gbm, GbmParams, MaxFeatures, ParamViolation, ValidationMode};
pub use rf::{train_rf, RfModel, RfParams};
pub use svm::{train_svm, train_svm_traced, SvmFit, SvmModel, SvmParams};

/// Stand-in for `ln(0)` that keeps model files finite; `exp` of it
/// underflows to exactly zero.
pub(crate) const LOG_ZERO: f64 = -1e300;

pub(crate) fn log_or_floor(p: f64) -> f64 {
    if p > 0.0 {
        p.ln()
    } else {
        LOG_ZERO
    }
}

/// Numerically stable softmax.
pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|&s| (s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankedClass {
    pub class_id: usize,
    pub probability: f64,
}

/// Classes ranked by descending probability, ties by ascending class id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub ranked: Vec<RankedClass>,
}

impl Prediction {
    pub fn from_probabilities(probabilities: &[f64], top_k: Option<usize>) -> Self {
        let mut ranked: Vec<RankedClass> = probabilities
            .iter()
            .enumerate()
            .map(|(class_id, &probability)| RankedClass {
                class_id,
                probability,
            })
            .collect();
        ranked.sort_by(|a, b| {
            b.probability
                .total_cmp(&a.probability)
                .then(a.class_id.cmp(&b.class_id))
        });
        if let Some(k) = top_k {
            ranked.truncate(k);
        }
        Self { ranked }
    }

    pub fn top(&self) -> Option<usize> {
        self.ranked.first().map(|r| r.class_id)
    }

    pub fn len(&self) -> usize {
        self.ranked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranked.is_empty()
    }
}

/// Ranked prediction for one vector, optionally truncated to `top_k`.
pub fn predict(model: &TrainedModel, x: &SymptomVector, top_k: Option<usize>) -> Result<Prediction> {
    if top_k == Some(0) {
        return Err(Error::InvalidArgument("top_k must be at least 1".into()));
    }
    let probabilities = model.class_probabilities(x)?;
    Ok(Prediction::from_probabilities(&probabilities, top_k))
}

/// A model kind together with its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
pub enum ModelSpec {
    Gbm(GbmParams),
    Svm(SvmParams),
    Knn(KnnParams),
    Nb(NbParams),
    Rf(RfParams),
}

impl ModelSpec {
    pub fn default_for(kind: ModelKind) -> Result<Self> {
        Ok(match kind {
            ModelKind::Gbm => ModelSpec::Gbm(GbmParams::default()),
            ModelKind::Svm => ModelSpec::Svm(SvmParams::default()),
            ModelKind::Knn => ModelSpec::Knn(KnnParams::default()),
            ModelKind::Nb => ModelSpec::Nb(NbParams::default()),
            ModelKind::Rf => ModelSpec::Rf(RfParams::default()),
            ModelKind::Kmeans => {
                return Err(Error::InvalidArgument(
                    "k-means is not a supervised classifier".into(),
                ))
            }
        })
    }

    /// Parses kind-specific parameters from JSON; missing fields take defaults.
    pub fn from_json(kind: ModelKind, params: serde_json::Value) -> Result<Self> {
        let ctx = format!("{kind} parameters");
        let parse = |v| -> Result<ModelSpec> {
            Ok(match kind {
                ModelKind::Gbm => ModelSpec::Gbm(serde_json::from_value(v).map_err(|e| Error::json(&ctx, e))?),
                ModelKind::Svm => ModelSpec::Svm(serde_json::from_value(v).map_err(|e| Error::json(&ctx, e))?),
                ModelKind::Knn => ModelSpec::Knn(serde_json::from_value(v).map_err(|e| Error::json(&ctx, e))?),
                ModelKind::Nb => ModelSpec::Nb(serde_json::from_value(v).map_err(|e| Error::json(&ctx, e))?),
                ModelKind::Rf => ModelSpec::Rf(serde_json::from_value(v).map_err(|e| Error::json(&ctx, e))?),
                ModelKind::Kmeans => return ModelSpec::default_for(kind),
            })
        };
        parse(params)
    }

    /// The model configuration a trained model was fitted with.
    pub fn from_model(model: &TrainedModel) -> Result<Self> {
        Ok(match &model.payload {
            ModelPayload::Gbm(m) => ModelSpec::Gbm(m.params.clone()),
            ModelPayload::Svm(m) => ModelSpec::Svm(m.params.clone()),
            ModelPayload::Knn(m) => ModelSpec::Knn(KnnParams { k: m.k }),
            ModelPayload::Nb(m) => ModelSpec::Nb(NbParams { alpha: m.alpha }),
            ModelPayload::Rf(m) => ModelSpec::Rf(m.params.clone()),
            ModelPayload::Kmeans(_) => return ModelSpec::default_for(ModelKind::Kmeans),
        })
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::Gbm(_) => ModelKind::Gbm,
            ModelSpec::Svm(_) => ModelKind::Svm,
            ModelSpec::Knn(_) => ModelKind::Knn,
            ModelSpec::Nb(_) => ModelKind::Nb,
            ModelSpec::Rf(_) => ModelKind::Rf,
        }
    }

    pub fn params_json(&self) -> serde_json::Value {
        let value = match self {
            ModelSpec::Gbm(p) => serde_json::to_value(p),
            ModelSpec::Svm(p) => serde_json::to_value(p),
            ModelSpec::Knn(p) => serde_json::to_value(p),
            ModelSpec::Nb(p) => serde_json::to_value(p),
            ModelSpec::Rf(p) => serde_json::to_value(p),
        };
        value.expect("parameter structs serialise")
    }

    /// Overrides the seed of seeded models; KNN and NB are deterministic.
    pub fn with_seed(mut self, seed: u64) -> Self {
        match &mut self {
            ModelSpec::Gbm(p) => p.seed = seed,
            ModelSpec::Svm(p) => p.seed = seed,
            ModelSpec::Rf(p) => p.seed = seed,
            ModelSpec::Knn(_) | ModelSpec::Nb(_) => {}
        }
        self
    }

    /// All parameter violations; strict mode only changes the GBM checks.
    pub fn validate(&self, mode: ValidationMode) -> Vec<ParamViolation> {
        use params::violation;
        match self {
            ModelSpec::Gbm(p) => validate_gbm(p, mode),
            ModelSpec::Svm(p) => {
                let mut v = Vec::new();
                if !(p.step_size > 0.0 && p.step_size.is_finite()) {
                    v.push(violation("step_size", p.step_size, "> 0"));
                }
                if !(p.l2_lambda >= 0.0 && p.l2_lambda.is_finite()) {
                    v.push(violation("l2_lambda", p.l2_lambda, ">= 0"));
                }
                v
            }
            ModelSpec::Knn(p) => {
                if p.k == 0 {
                    vec![violation("k", p.k, ">= 1")]
                } else {
                    Vec::new()
                }
            }
            ModelSpec::Nb(p) => {
                if p.alpha > 0.0 && p.alpha.is_finite() {
                    Vec::new()
                } else {
                    vec![violation("alpha", p.alpha, "> 0")]
                }
            }
            ModelSpec::Rf(p) => {
                let mut v = Vec::new();
                if p.n_trees == 0 {
                    v.push(violation("n_trees", p.n_trees, ">= 1"));
                }
                if p.max_depth == Some(0) {
                    v.push(violation("max_depth", 0, ">= 1"));
                }
                v
            }
        }
    }

    pub fn train(&self, ds: &LabeledDataset, mode: ValidationMode) -> Result<TrainedModel> {
        let violations = self.validate(mode);
        if !violations.is_empty() {
            return Err(Error::InvalidParams(violations));
        }
        match self {
            ModelSpec::Gbm(p) => train_gbm(ds, p, mode),
            ModelSpec::Svm(p) => train_svm(ds, p),
            ModelSpec::Knn(p) => train_knn(ds, p.k),
            ModelSpec::Nb(p) => train_nb(ds, p.alpha),
            ModelSpec::Rf(p) => train_rf(ds, p),
        }
    }
}
