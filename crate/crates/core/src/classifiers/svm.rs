//! Linear one-vs-rest SVM trained by stochastic subgradient descent.
//!
//! For every class `c` the model keeps `w_c, b_c` and minimises
//! `lambda/2 * |w_c|^2 + mean(max(0, 1 - y * (w_c . x + b_c)))` with
//! `y = +1` for class `c` and `-1` otherwise. Step `t` (counted over all
//! epochs) uses `step_size / (1 + t * lambda)`. Margins become
//! probabilities through a softmax, which is a ranking confidence rather
//! than a calibrated probability.

use serde::{Deserialize, Serialize};

use super::model::{ModelPayload, TrainedModel};
use super::softmax;
use crate::dataset::{LabeledDataset, SymptomVector};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmParams {
    pub epochs: usize,
    pub step_size: f64,
    pub l2_lambda: f64,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            epochs: 20,
            step_size: 0.1,
            l2_lambda: 1e-3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub params: SvmParams,
    /// `weights[class][feature]`.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl SvmModel {
    pub fn margins(&self, x: &SymptomVector) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| b + x.active().map(|j| w[j]).sum::<f64>())
            .collect()
    }

    pub fn predict_proba(&self, x: &SymptomVector) -> Vec<f64> {
        softmax(&self.margins(x))
    }
}

/// The fitted model and, per epoch, the mean over its steps of the
/// regularised objective summed over classes (evaluated before each update).
#[derive(Debug, Clone)]
pub struct SvmFit {
    pub model: TrainedModel,
    pub objective_trace: Vec<f64>,
}

pub fn train_svm(ds: &LabeledDataset, params: &SvmParams) -> Result<TrainedModel> {
    train_svm_traced(ds, params).map(|fit| fit.model)
}

pub fn train_svm_traced(ds: &LabeledDataset, params: &SvmParams) -> Result<SvmFit> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if ds.n_classes() < 2 {
        return Err(Error::InvalidDataset(
            "SVM training needs at least two classes".into(),
        ));
    }
    if !(params.step_size > 0.0 && params.step_size.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "step_size must be positive, got {}",
            params.step_size
        )));
    }
    if !(params.l2_lambda >= 0.0 && params.l2_lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "l2_lambda must be non-negative, got {}",
            params.l2_lambda
        )));
    }

    let n_classes = ds.n_classes();
    let n_features = ds.n_features();
    let lambda = params.l2_lambda;
    let rows: Vec<(Vec<usize>, usize)> = ds
        .samples()
        .iter()
        .map(|(x, y)| (x.active().collect(), *y))
        .collect();

    let mut weights = vec![vec![0.0f64; n_features]; n_classes];
    let mut bias = vec![0.0f64; n_classes];
    let mut sq_norms = vec![0.0f64; n_classes];
    let mut order: Vec<usize> = (0..rows.len()).collect();
    let mut rng = SplitMix64::new(params.seed);
    let mut objective_trace = Vec::with_capacity(params.epochs);
    let mut step = 0u64;

    for _ in 0..params.epochs {
        rng.shuffle(&mut order);
        let mut epoch_objective = 0.0;
        for &i in &order {
            let (active, label) = &rows[i];
            let eta = params.step_size / (1.0 + step as f64 * lambda);
            let shrink = 1.0 - eta * lambda;
            for c in 0..n_classes {
                let w = &mut weights[c];
                let y = if c == *label { 1.0 } else { -1.0 };
                let margin = bias[c] + active.iter().map(|&j| w[j]).sum::<f64>();
                let hinge = (1.0 - y * margin).max(0.0);
                epoch_objective += 0.5 * lambda * sq_norms[c] + hinge;

                if shrink != 1.0 {
                    w.iter_mut().for_each(|v| *v *= shrink);
                    sq_norms[c] *= shrink * shrink;
                }
                if hinge > 0.0 {
                    for &j in active {
                        let old = w[j];
                        let new = old + eta * y;
                        sq_norms[c] += new * new - old * old;
                        w[j] = new;
                    }
                    bias[c] += eta * y;
                }
            }
            step += 1;
        }
        objective_trace.push(epoch_objective / rows.len() as f64);
    }

    let model = TrainedModel::for_dataset(
        ds,
        ModelPayload::Svm(SvmModel {
            params: params.clone(),
            weights,
            bias,
        }),
    )?;
    Ok(SvmFit {
        model,
        objective_trace,
    })
}
